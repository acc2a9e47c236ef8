"""Regenerate the bundled FCIDUMP fixtures from presets.toml.

Requires PySCF. Each system gets <file> plus a <file>.json sidecar holding
the converged RHF energy and geometry. Scans are written as
<name>_<r>.fcidump for every grid point.

    python3 fixtures/generate.py            # everything
    python3 fixtures/generate.py H2 LiF     # selected systems/scans
"""
import json
import sys
try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib
from pathlib import Path

import numpy as np
from pyscf import ao2mo, gto, scf
from pyscf.tools import fcidump

HERE = Path(__file__).resolve().parent


def run_rhf(atoms):
    mol = gto.M(
        atom=[(a[0], tuple(a[1:])) for a in atoms],
        basis="sto-6g",
        unit="Angstrom",
        charge=0,
        spin=0,
        verbose=0,
    )
    mf = scf.RHF(mol)
    mf.conv_tol = 1e-12
    mf.conv_tol_grad = 1e-10
    mf.max_cycle = 500
    mf.kernel()
    if not mf.converged:
        raise RuntimeError(f"RHF did not converge for {atoms}")
    return mol, mf


def emit(atoms, name, tag, path, frozen):
    mol, mf = run_rhf(atoms)
    mo = mf.mo_coeff
    h1 = mo.T @ mf.get_hcore() @ mo
    eri = ao2mo.full(mol, mo, compact=False).reshape([mol.nao] * 4)
    fcidump.from_integrals(
        str(path), h1, ao2mo.restore(8, eri, mol.nao), mol.nao, mol.nelectron,
        nuc=mol.energy_nuc(), ms=0, tol=1e-15, float_format=" %.17e",
    )
    meta = {
        "name": name,
        "tag": tag,
        "basis": "STO-6G",
        "norb": int(mol.nao),
        "nelec": int(mol.nelectron),
        "frozen": frozen,
        "scf_energy": float(mf.e_tot),
        "mo_energy": [float(e) for e in mf.mo_energy],
        "atoms": atoms,
    }
    Path(str(path) + ".json").write_text(json.dumps(meta, indent=2) + "\n")
    print(f"{path.name}: E(RHF) = {mf.e_tot:.12f}")


def main(selected):
    presets = tomllib.loads((HERE / "presets.toml").read_text())
    for sys_ in presets["system"]:
        if selected and sys_["name"] not in selected:
            continue
        emit(sys_["atoms"], sys_["name"], sys_["tag"], HERE / sys_["file"], sys_["frozen"])
    for name, scan in presets.get("scan", {}).items():
        if selected and name not in selected:
            continue
        for r in scan["points"]:
            if name == "LiF":
                atoms = [["Li", 0.0, 0.0, 0.0], ["F", 0.0, 0.0, r]]
            elif name == "H8":
                atoms = [["H", 0.0, 0.0, k * r] for k in range(8)]
            else:
                raise ValueError(name)
            emit(atoms, name, f"{r:.2f}", HERE / f"{name.lower()}_{r:.2f}.fcidump", scan["frozen"])


if __name__ == "__main__":
    main(set(sys.argv[1:]))
