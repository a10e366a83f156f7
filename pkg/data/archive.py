import json
import logging
import zipfile

import numpy as np

from core.errors import FormatError, ValidationError
from core.fileio import atomic_path
from core.types import FEATURE_MODALITIES, FeatureSequence, FeatureSpec, Instance, LabelSet, ModalityKind
from data.dataset import Dataset

log = logging.getLogger(__name__)

ARCHIVE_VERSION = "avmc-feature-archive/1"
MANIFEST = "manifest.json"
# fixed entry timestamp keeps archives byte-identical across writes
_ZIP_EPOCH = (1980, 1, 1, 0, 0, 0)


def blob_name(instance_id, modality):
    return f"data/{instance_id}/{ModalityKind.parse(modality).value}.f32"


def _check_id(instance_id):
    if not instance_id or "/" in instance_id or "\\" in instance_id or instance_id in (".", ".."):
        raise ValidationError(f"instance id {instance_id!r} cannot be used as an archive path")


def _entry(name):
    info = zipfile.ZipInfo(name, date_time=_ZIP_EPOCH)
    info.compress_type = zipfile.ZIP_STORED
    info.external_attr = 0o644 << 16
    return info


def build_manifest(dataset):
    records = []
    for inst in dataset.instances:
        records.append({
            "id": inst.id,
            "split": inst.split.value,
            "labels": inst.labels.to_dict() if inst.labels is not None else None,
            "valid_len": {k.value: inst.features[k].valid_len for k in FEATURE_MODALITIES},
        })
    return {
        "version": ARCHIVE_VERSION,
        "specs": {k.value: dataset.specs[k].to_dict() for k in FEATURE_MODALITIES},
        "instances": records,
    }


def write_feature_archive(dataset, path):
    """Write `dataset` as a zip archive (manifest.json + raw little-endian float32 blobs)."""
    manifest = build_manifest(dataset)
    with atomic_path(path) as tmp:
        with zipfile.ZipFile(tmp, "w") as zf:
            zf.writestr(_entry(MANIFEST), json.dumps(manifest, indent=1, sort_keys=True))
            for inst in dataset.instances:
                _check_id(inst.id)
                for kind in FEATURE_MODALITIES:
                    blob = np.ascontiguousarray(inst.features[kind].values, dtype="<f4").tobytes()
                    zf.writestr(_entry(blob_name(inst.id, kind)), blob)
    log.info("Wrote %d instances to %s", len(dataset), path)
    return path


def _parse_specs(raw_specs):
    specs = {}
    for kind in FEATURE_MODALITIES:
        if kind.value not in raw_specs:
            raise FormatError(f"manifest specs are missing {kind.value}")
        entry = raw_specs[kind.value]
        specs[kind] = FeatureSpec(kind, int(entry["seq_len"]), int(entry["feat_dim"]))
    return specs


def _read_sequence(zf, record, spec):
    inst_id = record["id"]
    name = blob_name(inst_id, spec.modality)
    try:
        blob = zf.read(name)
    except KeyError:
        raise ValidationError(f"{inst_id}: missing blob {name}") from None
    expected = spec.seq_len * spec.feat_dim * 4
    if len(blob) != expected:
        raise ValidationError(
            f"{inst_id}: {spec.modality.value} blob has {len(blob)} bytes, "
            f"expected {expected} for shape {spec.shape}"
        )
    values = np.frombuffer(blob, dtype="<f4").reshape(spec.shape).astype(np.float32)
    if not np.isfinite(values).all():
        raise ValidationError(f"{inst_id}: non-finite {spec.modality.value} values")
    try:
        valid_len = int(record["valid_len"][spec.modality.value])
        return FeatureSequence(spec=spec, values=values, valid_len=valid_len)
    except (KeyError, TypeError):
        raise ValidationError(f"{inst_id}: manifest has no {spec.modality.value} valid_len") from None
    except ValueError as exc:
        raise ValidationError(f"{inst_id}: {exc}") from None


def load_feature_archive(path):
    try:
        zf = zipfile.ZipFile(path, "r")
    except zipfile.BadZipFile as exc:
        raise FormatError(f"{path}: not a feature archive ({exc})") from None

    with zf:
        if MANIFEST not in zf.namelist():
            raise FormatError(f"{path}: missing {MANIFEST}")
        try:
            manifest = json.loads(zf.read(MANIFEST).decode("utf-8"))
        except ValueError as exc:
            raise FormatError(f"{path}: unreadable manifest ({exc})") from None
        if manifest.get("version") != ARCHIVE_VERSION:
            raise FormatError(f"{path}: unsupported archive version {manifest.get('version')!r}")
        specs = _parse_specs(manifest.get("specs", {}))

        instances = []
        for record in manifest.get("instances", []):
            inst_id = str(record.get("id", ""))
            _check_id(inst_id)
            features = {kind: _read_sequence(zf, record, specs[kind]) for kind in FEATURE_MODALITIES}
            try:
                labels = LabelSet.from_dict(record.get("labels"))
                instances.append(Instance(id=inst_id, split=record.get("split"),
                                          features=features, labels=labels))
            except ValidationError as exc:
                if str(exc).startswith(inst_id):
                    raise
                raise ValidationError(f"{inst_id}: {exc}") from None

    dataset = Dataset(instances=instances, specs=specs)
    log.info("Loaded %s: %d supervised / %d unsupervised instances",
             path, dataset.stats.n_supervised, dataset.stats.n_unsupervised)
    return dataset
