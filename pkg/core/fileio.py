import json
import os
import shutil
import tempfile
from contextlib import contextmanager


@contextmanager
def atomic_path(path):
    """
    Yield a temporary path next to `path`; it replaces `path` only if the
    block exits cleanly, so error paths leave no partial file behind.
    """
    directory = os.path.dirname(os.path.abspath(path))
    os.makedirs(directory, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-", suffix=os.path.basename(path))
    os.close(fd)
    try:
        yield tmp
        os.replace(tmp, path)
    finally:
        if os.path.exists(tmp):
            os.remove(tmp)


def write_csv_atomic(df, path):
    with atomic_path(path) as tmp:
        df.to_csv(tmp, index=False)


def write_json_atomic(obj, path):
    with atomic_path(path) as tmp:
        with open(tmp, "w", encoding="utf-8") as fh:
            json.dump(obj, fh, indent=2, sort_keys=False)
            fh.write("\n")


@contextmanager
def staging_dir(out_dir):
    """
    Collect outputs in a sibling temp dir and move them into `out_dir` on
    success. On error the staging dir is removed and `out_dir` is untouched.
    """
    parent = os.path.dirname(os.path.abspath(out_dir))
    os.makedirs(parent, exist_ok=True)
    tmp = tempfile.mkdtemp(dir=parent, prefix=".staging-")
    try:
        yield tmp
        os.makedirs(out_dir, exist_ok=True)
        for name in sorted(os.listdir(tmp)):
            os.replace(os.path.join(tmp, name), os.path.join(out_dir, name))
    finally:
        shutil.rmtree(tmp, ignore_errors=True)
