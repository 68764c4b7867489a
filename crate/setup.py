"""Builds the native extension with cargo instead of a C compiler.

The Extension entry has no sources; build_ext is overridden to run
cargo on the covertime-python crate and copy the produced cdylib to
wherever setuptools expects the extension to land (including in-place
for editable installs).
"""

import shutil
import subprocess
import sys
from pathlib import Path

from setuptools import Extension, setup
from setuptools.command.build_ext import build_ext


class CargoBuildExt(build_ext):
    def build_extension(self, ext):
        root = Path(__file__).resolve().parent
        subprocess.run(
            ["cargo", "build", "--release", "-p", "covertime-python"],
            cwd=root,
            check=True,
        )
        stem = "covertime_py"
        if sys.platform == "darwin":
            built = root / "target" / "release" / f"lib{stem}.dylib"
        elif sys.platform.startswith("win"):
            built = root / "target" / "release" / f"{stem}.dll"
        else:
            built = root / "target" / "release" / f"lib{stem}.so"
        dest = Path(self.get_ext_fullpath(ext.name))
        dest.parent.mkdir(parents=True, exist_ok=True)
        shutil.copy2(built, dest)


setup(
    ext_modules=[Extension("covertime.covertime_py", sources=[])],
    cmdclass={"build_ext": CargoBuildExt},
)
