"""JSON code format and CSV sweep emission.

Code files carry {"modes", "cutoff", "tag", "params": {N,S,L,G,D,d},
"words": [[[re, im], ...], ...]} with words flattened row-major for two
modes.  Written artifacts wrap the payload in an envelope recording the tool
version, the generating configuration and the seed, so every file is
reproducible from its own header; the loader accepts enveloped and bare
payloads alike.
"""

from __future__ import annotations

import json
from dataclasses import asdict
from pathlib import Path

import numpy as np

from . import __version__
from .codes import Code, CodeParams
from .fock import StateVector


def code_to_dict(code: Code) -> dict:
    p = code.params
    words = []
    for w in code.words:
        amps = w.as_complex128()
        words.append([[float(a.real), float(a.imag)] for a in amps])
    return {
        "modes": code.modes,
        "cutoff": code.cutoff,
        "tag": code.tag,
        "params": {"N": p.N, "S": p.S, "L": p.L, "G": p.G, "D": p.D, "d": p.d},
        "words": words,
    }


def code_from_dict(data: dict) -> Code:
    if "code" in data:
        data = data["code"]
    p = data["params"]
    params = CodeParams(
        N=p["N"], S=p["S"], L=p["L"], G=p["G"], D=p["D"], d=p["d"],
        cutoff=data["cutoff"],
    )
    words = []
    for amps in data["words"]:
        vec = np.array([complex(re, im) for re, im in amps])
        words.append(StateVector(vec, data["cutoff"], modes=data["modes"]))
    return Code(tuple(words), params, tag=data["tag"], modes=data["modes"])


def envelope(payload: dict, config: dict, seed: int | None = None) -> dict:
    out = {
        "tool": "bosonicqec",
        "version": __version__,
        "config": config,
        **payload,
    }
    if seed is not None:
        out["seed"] = seed
    return out


def save_code(code: Code, path, config: dict | None = None, seed: int | None = None,
              extra: dict | None = None) -> None:
    payload: dict = {"code": code_to_dict(code)}
    if extra:
        payload.update(extra)
    doc = envelope(payload, config or {}, seed)
    Path(path).write_text(json.dumps(doc, indent=2) + "\n")


def load_code(path) -> Code:
    return code_from_dict(json.loads(Path(path).read_text()))


def write_sweep_csv(rows, path, config: dict | None = None, seed: int | None = None) -> None:
    """Rates in units of kappa, one row per timestep, config in '#' comments."""
    if not rows:
        raise ValueError("no sweep rows to write")
    labels = list(rows[0].rates.keys())
    lines = [
        f"# tool=bosonicqec version={__version__}",
        f"# config={json.dumps(config or {}, sort_keys=True)}",
    ]
    if seed is not None:
        lines.append(f"# seed={seed}")
    lines.append(",".join(["kappa_dt"] + labels))
    for row in rows:
        lines.append(",".join([repr(row.kappa_dt)] + [repr(row.rates[l]) for l in labels]))
    Path(path).write_text("\n".join(lines) + "\n")


def read_sweep_csv(path):
    """Return (labels, array) with kappa_dt in the first column."""
    lines = [l for l in Path(path).read_text().splitlines() if l and not l.startswith("#")]
    header = lines[0].split(",")
    data = np.array([[float(x) for x in line.split(",")] for line in lines[1:]])
    return header[1:], data
