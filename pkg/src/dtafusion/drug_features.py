"""Molecular graph featurization and binary fingerprints.

Atom feature layout (width 78): one-hot symbol over ``ATOM_SYMBOLS`` (44, last
slot catches everything else) | one-hot degree 0-10 | one-hot total hydrogens
0-10 | one-hot implicit valence 0-10 | aromatic flag. Values above 10 clamp to
the last bucket with a warning.

Fingerprints are 0/1 vectors: circular neighborhood hashing (radius 2, 1024
bits) and linear bond-path hashing (paths of 1..7 bonds, 2048 bits). Hashing
uses a fixed FNV-1a mix so bit layouts are stable across runs and platforms;
see FINGERPRINT_HASH_VERSION.
"""

import logging
from dataclasses import dataclass

import numpy as np

from .protein_features import DRUG_FP_DIM, FeatureVector
from .smiles import AROMATIC_ORDER, Molecule, parse_smiles  # noqa: F401 (re-export)

logger = logging.getLogger(__name__)

FINGERPRINT_HASH_VERSION = "fnv1a32-v1"

# GraphDTA-lineage symbol vocabulary; final slot is the catch-all.
ATOM_SYMBOLS = [
    "C", "N", "O", "S", "F", "Si", "P", "Cl", "Br", "Mg", "Na", "Ca", "Fe",
    "As", "Al", "I", "B", "V", "K", "Tl", "Yb", "Sb", "Sn", "Ag", "Pd", "Co",
    "Se", "Ti", "Zn", "H", "Li", "Ge", "Cu", "Au", "Ni", "Cd", "In", "Mn",
    "Zr", "Cr", "Pt", "Hg", "Pb", "Unknown",
]
_SYMBOL_INDEX = {s: i for i, s in enumerate(ATOM_SYMBOLS)}

DRUG_NODE_DIM = len(ATOM_SYMBOLS) + 11 + 11 + 11 + 1  # 78

_FNV_OFFSET = 0x811C9DC5
_FNV_PRIME = 0x01000193


def _mix(h, value):
    return ((h ^ (value & 0xFFFFFFFF)) * _FNV_PRIME) & 0xFFFFFFFF


def stable_hash(values):
    """FNV-1a over a sequence of ints; stable 32-bit, no PYTHONHASHSEED."""
    h = _FNV_OFFSET
    for v in values:
        h = _mix(h, v)
    return h


def _bond_code(order):
    if order == AROMATIC_ORDER:
        return 4
    return int(order)


@dataclass(frozen=True)
class MoleculeGraph:
    """Atom-node graph with fixed-width one-hot features."""

    node_features: np.ndarray  # (num_atoms, 78)
    edges: list  # undirected (i, j) pairs, i < j

    def __post_init__(self):
        if self.node_features.ndim != 2 or self.node_features.shape[1] != DRUG_NODE_DIM:
            raise ValueError(f"node features must be (n, {DRUG_NODE_DIM})")
        if any(i == j for i, j in self.edges):
            raise ValueError("self-edge in molecule graph")

    @property
    def num_atoms(self):
        return self.node_features.shape[0]


def _clamped_onehot(value, width, what):
    vec = np.zeros(width)
    if value >= width:
        logger.warning("%s=%d exceeds bucket range, clamping to %d", what, value, width - 1)
        value = width - 1
    vec[value] = 1.0
    return vec


def build_drug_graph(mol):
    """MoleculeGraph for a perceived Molecule; edges mirror the bonds."""
    rows = []
    for atom in mol.atoms:
        sym = np.zeros(len(ATOM_SYMBOLS))
        sym[_SYMBOL_INDEX.get(atom.symbol, len(ATOM_SYMBOLS) - 1)] = 1.0
        rows.append(
            np.concatenate(
                [
                    sym,
                    _clamped_onehot(atom.degree, 11, "degree"),
                    _clamped_onehot(atom.total_hydrogens, 11, "total hydrogens"),
                    _clamped_onehot(atom.implicit_valence, 11, "implicit valence"),
                    [1.0 if atom.is_aromatic else 0.0],
                ]
            )
        )
    edges = [(i, j) for i, j, _order in mol.bonds]
    return MoleculeGraph(node_features=np.array(rows).reshape(len(rows), DRUG_NODE_DIM), edges=edges)


def _initial_invariants(mol):
    return [
        stable_hash(
            [ord(c) for c in atom.symbol]
            + [atom.degree, atom.total_hydrogens, atom.charge + 64,
               int(atom.is_aromatic), int(atom.in_ring)]
        )
        for atom in mol.atoms
    ]


def morgan_fingerprint(mol, radius=2, nbits=1024):
    """Circular (ECFP-style) fingerprint: iterative neighborhood hashing for
    radii 0..radius, distinct identifiers folded modulo nbits.

    Standard environment deduplication applies: an identifier is dropped when
    its bond environment stopped growing, and among environments covering the
    same bond set only the smallest identifier survives (atom-order
    independent, so rewritten SMILES of one molecule fingerprint equally).
    """
    adj = mol.neighbors()
    bond_of = {}
    for bi, (i, j, _order) in enumerate(mol.bonds):
        bond_of[(i, j)] = bi
        bond_of[(j, i)] = bi
    current = _initial_invariants(mol)
    envs = [frozenset() for _ in range(mol.num_atoms)]
    identifiers = set(current)
    seen_envs = set()
    for r in range(1, radius + 1):
        nxt_ids = []
        nxt_envs = []
        for idx in range(mol.num_atoms):
            parts = sorted((_bond_code(order), current[nbr]) for nbr, order in adj[idx])
            seq = [r, current[idx]]
            for code, nbr_id in parts:
                seq.extend((code, nbr_id))
            nxt_ids.append(stable_hash(seq))
            grown = set(envs[idx])
            for nbr, _order in adj[idx]:
                grown.add(bond_of[(idx, nbr)])
                grown.update(envs[nbr])
            nxt_envs.append(frozenset(grown))
        smallest = {}
        for idx in range(mol.num_atoms):
            env = nxt_envs[idx]
            if env == envs[idx] or env in seen_envs:
                continue
            if env not in smallest or nxt_ids[idx] < smallest[env]:
                smallest[env] = nxt_ids[idx]
        identifiers.update(smallest.values())
        seen_envs.update(smallest)
        current = nxt_ids
        envs = nxt_envs
    bits = np.zeros(nbits)
    for ident in identifiers:
        bits[ident % nbits] = 1.0
    return FeatureVector(bits, "MORGAN", expected_length=nbits)


def _atom_path_code(atom):
    return stable_hash([ord(c) for c in atom.symbol] + [int(atom.is_aromatic)])


def bond_path_classes(mol, max_path=7):
    """Canonical classes of simple linear bond paths of 1..max_path bonds.

    A class is the alternating (atom code, bond code, ...) sequence, taken as
    the lexicographic minimum of the two traversal directions.
    """
    adj = mol.neighbors()
    codes = [_atom_path_code(a) for a in mol.atoms]
    classes = set()

    def walk(path, seq, used_bonds):
        if len(path) > 1:
            classes.add(min(tuple(seq), tuple(reversed(seq))))
        if len(path) - 1 == max_path:
            return
        last = path[-1]
        for nbr, order in adj[last]:
            key = (min(last, nbr), max(last, nbr))
            if key in used_bonds or nbr in path:
                continue
            used_bonds.add(key)
            path.append(nbr)
            seq.extend((_bond_code(order), codes[nbr]))
            walk(path, seq, used_bonds)
            seq.pop()
            seq.pop()
            path.pop()
            used_bonds.remove(key)

    for start in range(mol.num_atoms):
        walk([start], [codes[start]], set())
    return classes


def daylight_fingerprint(mol, max_path=7, nbits=2048):
    """Path-based fingerprint: linear bond paths of length 1..max_path hashed
    and folded modulo nbits. Single atoms have no paths -> all-zero vector."""
    bits = np.zeros(nbits)
    for cls in bond_path_classes(mol, max_path):
        bits[stable_hash(cls) % nbits] = 1.0
    return FeatureVector(bits, "DAYLIGHT", expected_length=nbits)


def drug_fingerprint(mol):
    """Concatenation [MORGAN | DAYLIGHT], 3072 dims."""
    out = np.concatenate(
        [morgan_fingerprint(mol).values, daylight_fingerprint(mol).values]
    )
    assert out.shape[0] == DRUG_FP_DIM
    return FeatureVector(out, "DRUG_CONCAT")


def heavy_atom_count(mol):
    return mol.num_atoms


def aromatic_atom_count(mol):
    return mol.aromatic_atom_count


def bond_count(mol):
    return mol.num_bonds
