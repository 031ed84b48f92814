"""PDB parsing and residue-level protein graph construction.

Each amino acid residue becomes one node placed at its heavy-atom center of
mass. Node features (width 29): one-hot residue type over the 20-letter
alphabet | molecular weight (standardized) | polarity flag | Kyte-Doolittle
hydropathy (standardized) | three pKa values (side chain 0 when absent) |
x, y, z of the residue center of mass, after centering the whole protein's
center of mass at the origin. Standardization constants are the mean/std of
the fixed 20-residue tables in ``aadata`` (dataset-independent by
construction).

Edges: center-of-mass contacts within ``contact_threshold`` angstroms plus
backbone (i, i+1) adjacency within each chain.
"""

from dataclasses import dataclass

import numpy as np

from . import kernels
from .aadata import (
    AA_ALPHABET,
    AA_HYDROPATHY,
    AA_INDEX,
    AA_MOLECULAR_WEIGHT,
    AA_PKA,
    AA_POLAR,
    ELEMENT_MASS,
    THREE_TO_ONE,
)

PROTEIN_NODE_DIM = 20 + 1 + 1 + 1 + 3 + 3  # 29
DEFAULT_CONTACT_THRESHOLD = 8.0

_MW = np.array([AA_MOLECULAR_WEIGHT[aa] for aa in AA_ALPHABET])
MW_MEAN, MW_STD = float(_MW.mean()), float(_MW.std())
_KD = np.array([AA_HYDROPATHY[aa] for aa in AA_ALPHABET])
KD_MEAN, KD_STD = float(_KD.mean()), float(_KD.std())


class PdbError(ValueError):
    """Unparseable or empty PDB content; message names the offending line."""


@dataclass
class Residue:
    """One residue: sequence position, type, and heavy atoms with masses."""

    index: int
    aa_code: str
    atoms: list  # (element, x, y, z, mass)
    chain: str = "A"


@dataclass(frozen=True)
class ResidueGraph:
    """Residue-node graph with physicochemical + positional features."""

    node_features: np.ndarray  # (num_residues, 29)
    edges: list  # undirected (i, j), i < j
    num_residues: int

    def __post_init__(self):
        if self.node_features.shape != (self.num_residues, PROTEIN_NODE_DIM):
            raise ValueError(
                f"node features must be ({self.num_residues}, {PROTEIN_NODE_DIM})"
            )
        if any(i == j for i, j in self.edges):
            raise ValueError("self-edge in residue graph")


def _element_from_atom_name(name):
    stripped = name.strip()
    if not stripped:
        return ""
    if stripped[0].isdigit():
        stripped = stripped.lstrip("0123456789")
    if not stripped:
        return ""
    if stripped[0] == "H":
        return "H"
    return stripped[0]


def parse_structure(pdb_text):
    """Parse ATOM records into residues (hydrogens excluded).

    Residues are grouped by (chain, residue number, insertion code) in order
    of first appearance; only the first MODEL of multi-model files is read.
    Raises PdbError when no ATOM records are found or a coordinate field is
    unparseable (reporting the line number).
    """
    residues = []
    index_of = {}
    for lineno, line in enumerate(pdb_text.splitlines(), start=1):
        record = line[:6].strip()
        if record == "ENDMDL":
            break
        if record != "ATOM":
            continue
        altloc = line[16:17]
        if altloc not in (" ", "", "A"):
            continue
        element = line[76:78].strip().upper()
        if not element:
            element = _element_from_atom_name(line[12:16]).upper()
        if element in ("H", "D"):
            continue
        if element not in ELEMENT_MASS:
            raise PdbError(f"line {lineno}: unknown element {element!r}")
        try:
            x = float(line[30:38])
            y = float(line[38:46])
            z = float(line[46:54])
        except (ValueError, IndexError):
            raise PdbError(f"line {lineno}: unparseable coordinates")
        if not (np.isfinite(x) and np.isfinite(y) and np.isfinite(z)):
            raise PdbError(f"line {lineno}: non-finite coordinates")
        chain = line[21:22]
        res_key = (chain, line[22:26], line[26:27])
        if res_key not in index_of:
            resname = line[17:20].strip().upper()
            aa = THREE_TO_ONE.get(resname, "X")
            index_of[res_key] = len(residues)
            residues.append(Residue(index=len(residues), aa_code=aa, atoms=[], chain=chain))
        residues[index_of[res_key]].atoms.append(
            (element, x, y, z, ELEMENT_MASS[element])
        )
    if not residues:
        raise PdbError("no ATOM records found")
    return residues


def residue_center_of_mass(residue):
    """Mass-weighted mean of the residue's heavy-atom coordinates."""
    if not residue.atoms:
        raise ValueError(f"residue {residue.index} has no atoms")
    masses = np.array([a[4] for a in residue.atoms])
    coords = np.array([[a[1], a[2], a[3]] for a in residue.atoms])
    total = masses.sum()
    if total <= 0:
        raise ValueError(f"residue {residue.index} has zero total mass")
    return tuple((masses[:, None] * coords).sum(axis=0) / total)


def build_protein_graph(residues, contact_threshold=DEFAULT_CONTACT_THRESHOLD):
    """ResidueGraph from parsed residues.

    Edges are center-of-mass contacts within ``contact_threshold`` plus
    backbone adjacency (no backbone edges across chain boundaries).
    """
    if not residues:
        raise ValueError("empty residue list")
    unknown = [r.index for r in residues if r.aa_code not in AA_INDEX]
    if unknown:
        raise ValueError(f"residue(s) {unknown} have non-standard amino acid codes")

    coms = np.array([residue_center_of_mass(r) for r in residues])
    masses = np.array([sum(a[4] for a in r.atoms) for r in residues])
    overall = (masses[:, None] * coms).sum(axis=0) / masses.sum()
    centered = coms - overall

    n = len(residues)
    feats = np.zeros((n, PROTEIN_NODE_DIM))
    for i, res in enumerate(residues):
        aa = res.aa_code
        feats[i, AA_INDEX[aa]] = 1.0
        feats[i, 20] = (AA_MOLECULAR_WEIGHT[aa] - MW_MEAN) / MW_STD
        feats[i, 21] = AA_POLAR[aa]
        feats[i, 22] = (AA_HYDROPATHY[aa] - KD_MEAN) / KD_STD
        feats[i, 23:26] = AA_PKA[aa]
    feats[:, 26:29] = centered

    ii, jj = kernels.contact_pairs(np.ascontiguousarray(centered), contact_threshold)
    edges = set(zip(ii.tolist(), jj.tolist()))
    for i in range(n - 1):
        if residues[i].chain == residues[i + 1].chain:
            edges.add((i, i + 1))
    return ResidueGraph(
        node_features=feats, edges=sorted(edges), num_residues=n
    )


def structure_sequence(residues):
    """One-letter sequence spelled by the residue list."""
    return "".join(r.aa_code for r in residues)
