"""Text spec files.

A spec file is an INI-style document with a ``[series]`` section::

    [series]
    family = dirichlet-L
    q = 5
    index = 2

Hurwitz combinations list weights as ``weight.<a> = <real>[,<imag>]``.  A
custom series names two whitespace-separated tables relative to the spec
file, ``coefficients = coeffs.txt`` (rows ``re im``) and
``exponents = lambdas.txt`` (one value per row)::

    [series]
    family = custom
    name = geometric
    coefficients = coeffs.txt
    exponents = lambdas.txt
"""

from __future__ import annotations

import configparser
from pathlib import Path

import numpy as np

from . import errors


def _complex(text: str) -> complex:
    parts = [float(x) for x in text.replace(",", " ").split()]
    if len(parts) == 1:
        return complex(parts[0])
    if len(parts) == 2:
        return complex(parts[0], parts[1])
    raise errors.InvalidSpec(f"cannot read complex number from {text!r}")


def load_spec(path):
    """Read a spec file and build the SeriesSpec it describes."""
    from .series import combination_preset, make_preset

    path = Path(path)
    if not path.is_file():
        raise errors.InvalidSpec(f"unknown spec reference {str(path)!r}")
    cp = configparser.ConfigParser()
    cp.read(path)
    if "series" not in cp:
        raise errors.InvalidSpec("spec file lacks a [series] section")
    sec = cp["series"]
    family = sec.get("family", "").strip()
    if family == "zeta":
        return make_preset("zeta")
    if family == "dirichlet-L":
        return make_preset("dirichlet-L", q=sec.getint("q"), index=sec.getint("index"))
    if family == "davenport-heilbronn":
        return make_preset("davenport-heilbronn")
    if family == "hurwitz-combination":
        weights = {int(k.split(".", 1)[1]): _complex(v) for k, v in sec.items() if k.startswith("weight.")}
        return make_preset("hurwitz-combination", q=sec.getint("q"), weights=weights,
                           name=sec.get("name", f"hurwitz({sec.get('q')})"))
    if family == "linear-combination":
        q = sec.getint("q")
        i, j = sec.getint("i"), sec.getint("j")
        return combination_preset(q, i, j, sec.getfloat("weight"))
    if family == "custom":
        coef = np.loadtxt(path.parent / sec["coefficients"], ndmin=2)
        lam = np.loadtxt(path.parent / sec["exponents"], ndmin=1)
        a = coef[:, 0] + 1j * (coef[:, 1] if coef.shape[1] > 1 else 0.0)
        return make_preset("custom", name=sec.get("name", path.stem), coefficients=a, exponents=lam,
                           multiplicative=sec.getboolean("multiplicative", False))
    raise errors.UnknownFamily(f"unknown family {family!r}")
