"""FSM recovery planning, thermal digital twin and control loop bindings."""

import importlib
import importlib.util
import os
import pathlib


def _load_core():
    # In an installed wheel _core sits next to this file; during development
    # AGCTL_EXT_DIR points at the cmake build tree instead.
    ext_dir = os.environ.get("AGCTL_EXT_DIR")
    if ext_dir:
        matches = sorted(pathlib.Path(ext_dir).glob("_core*.so"))
        if not matches:
            raise ImportError(f"no _core extension found in {ext_dir}")
        spec = importlib.util.spec_from_file_location(
            __name__ + "._core", matches[0]
        )
        module = importlib.util.module_from_spec(spec)
        spec.loader.exec_module(module)
        return module
    return importlib.import_module("._core", __name__)


_core = _load_core()

_names = [name for name in dir(_core) if not name.startswith("_")]
globals().update({name: getattr(_core, name) for name in _names})

__all__ = _names
