"""Featurization of datasets and batch assembly for training.

Per protein: the residue graph (from its PDB structure) and the 8863-dim
descriptor. Per drug: the molecular graph (from SMILES) and the 3072-dim
fingerprint. Entities are featurized once and deduplicated inside every
batch: each batch carries the unique entities' packed graphs/vectors plus
per-example gather indices.

``FEATURIZATION_VERSION`` hashes the full feature layout; caches and
checkpoints embed it, and loading anything with a different version is an
error.
"""

import hashlib
import json
import os
from dataclasses import dataclass

import numpy as np

from .drug_features import (
    ATOM_SYMBOLS,
    DRUG_NODE_DIM,
    FINGERPRINT_HASH_VERSION,
    build_drug_graph,
    drug_fingerprint,
)
from .protein_features import DRUG_FP_DIM, PROTEIN_FP_DIM, protein_fingerprint
from .protein_graph import (
    DEFAULT_CONTACT_THRESHOLD,
    PROTEIN_NODE_DIM,
    build_protein_graph,
    parse_structure,
)
from .smiles import parse_smiles

_LAYOUT = {
    "protein_node_dim": PROTEIN_NODE_DIM,
    "drug_node_dim": DRUG_NODE_DIM,
    "protein_fp_dim": PROTEIN_FP_DIM,
    "drug_fp_dim": DRUG_FP_DIM,
    "atom_symbols": ATOM_SYMBOLS,
    "contact_threshold": DEFAULT_CONTACT_THRESHOLD,
    "morgan": {"radius": 2, "nbits": 1024},
    "daylight": {"max_path": 7, "nbits": 2048},
    "qsorder": {"nlag": 30, "weight": 0.1},
    "hash": FINGERPRINT_HASH_VERSION,
}
FEATURIZATION_VERSION = hashlib.sha256(
    json.dumps(_LAYOUT, sort_keys=True).encode()
).hexdigest()[:16]


@dataclass
class EntityFeatures:
    """One entity's graph (node matrix + undirected edges) and flat vector."""

    node_features: np.ndarray
    edges: np.ndarray  # (E, 2) int64, may be empty
    fp: np.ndarray


@dataclass
class FeaturizedDataset:
    """Examples plus featurized unique entities (shared, immutable)."""

    examples: list
    proteins: dict  # protein_id -> EntityFeatures
    drugs: dict  # drug_id -> EntityFeatures
    molecules: dict  # drug_id -> Molecule (kept for error analysis)

    def __len__(self):
        return len(self.examples)

    def subset(self, examples):
        return FeaturizedDataset(
            examples=list(examples),
            proteins=self.proteins,
            drugs=self.drugs,
            molecules=self.molecules,
        )


def featurize_protein(sequence, pdb_text, contact_threshold=DEFAULT_CONTACT_THRESHOLD):
    graph = build_protein_graph(parse_structure(pdb_text), contact_threshold)
    edges = np.array(graph.edges, dtype=np.int64).reshape(-1, 2)
    return EntityFeatures(
        node_features=graph.node_features,
        edges=edges,
        fp=protein_fingerprint(sequence).values,
    )


def featurize_drug(smiles):
    mol = parse_smiles(smiles)
    graph = build_drug_graph(mol)
    edges = np.array(graph.edges, dtype=np.int64).reshape(-1, 2)
    feats = EntityFeatures(
        node_features=graph.node_features,
        edges=edges,
        fp=drug_fingerprint(mol).values,
    )
    return feats, mol


def featurize_dataset(ds, structure_texts, contact_threshold=DEFAULT_CONTACT_THRESHOLD):
    """FeaturizedDataset from a Dataset and protein_id -> PDB text mapping."""
    proteins = {}
    for record in ds.proteins:
        if record.protein_id not in structure_texts:
            raise ValueError(f"no structure for protein {record.protein_id}")
        proteins[record.protein_id] = featurize_protein(
            record.sequence, structure_texts[record.protein_id], contact_threshold
        )
    drugs = {}
    molecules = {}
    for record in ds.drugs:
        drugs[record.drug_id], molecules[record.drug_id] = featurize_drug(record.smiles)
    return FeaturizedDataset(
        examples=list(ds.examples), proteins=proteins, drugs=drugs, molecules=molecules
    )


# -- batches -----------------------------------------------------------------


@dataclass
class Batch:
    """Packed inputs for one optimizer step (entities deduplicated)."""

    examples: list
    y: np.ndarray
    prot_index: np.ndarray
    drug_index: np.ndarray
    n_proteins: int
    n_drugs: int
    prot_node_x: np.ndarray
    prot_src: np.ndarray
    prot_dst: np.ndarray
    prot_seg: np.ndarray
    prot_fp: np.ndarray
    drug_node_x: np.ndarray
    drug_src: np.ndarray
    drug_dst: np.ndarray
    drug_seg: np.ndarray
    drug_fp: np.ndarray


def _pack_graphs(entities):
    """Concatenate entity graphs block-diagonally; undirected edges become
    two directed arcs each."""
    xs, srcs, dsts, segs = [], [], [], []
    offset = 0
    for gid, ent in enumerate(entities):
        n = ent.node_features.shape[0]
        xs.append(ent.node_features)
        if ent.edges.shape[0]:
            e = ent.edges + offset
            srcs.append(np.concatenate([e[:, 0], e[:, 1]]))
            dsts.append(np.concatenate([e[:, 1], e[:, 0]]))
        segs.append(np.full(n, gid, dtype=np.int64))
        offset += n
    empty = np.zeros(0, dtype=np.int64)
    return (
        np.ascontiguousarray(np.concatenate(xs)),
        np.concatenate(srcs) if srcs else empty,
        np.concatenate(dsts) if dsts else empty,
        np.concatenate(segs),
    )


def pack_batch(fd, examples):
    """Batch for a list of examples, deduplicating proteins and drugs."""
    prot_ids, drug_ids = [], []
    prot_row, drug_row = {}, {}
    prot_index = np.empty(len(examples), dtype=np.int64)
    drug_index = np.empty(len(examples), dtype=np.int64)
    for k, ex in enumerate(examples):
        if ex.protein_id not in prot_row:
            prot_row[ex.protein_id] = len(prot_ids)
            prot_ids.append(ex.protein_id)
        if ex.drug_id not in drug_row:
            drug_row[ex.drug_id] = len(drug_ids)
            drug_ids.append(ex.drug_id)
        prot_index[k] = prot_row[ex.protein_id]
        drug_index[k] = drug_row[ex.drug_id]

    prots = [fd.proteins[pid] for pid in prot_ids]
    drugs = [fd.drugs[did] for did in drug_ids]
    px, psrc, pdst, pseg = _pack_graphs(prots)
    dx, dsrc, ddst, dseg = _pack_graphs(drugs)
    return Batch(
        examples=list(examples),
        y=np.array([ex.kiba_score for ex in examples], dtype=float),
        prot_index=prot_index,
        drug_index=drug_index,
        n_proteins=len(prot_ids),
        n_drugs=len(drug_ids),
        prot_node_x=px,
        prot_src=psrc,
        prot_dst=pdst,
        prot_seg=pseg,
        prot_fp=np.ascontiguousarray(np.stack([p.fp for p in prots])),
        drug_node_x=dx,
        drug_src=dsrc,
        drug_dst=ddst,
        drug_seg=dseg,
        drug_fp=np.ascontiguousarray(np.stack([d.fp for d in drugs])),
    )


def iter_batches(fd, batch_size, rng=None):
    """Batches in dataset order, or shuffled when an rng is given."""
    order = np.arange(len(fd.examples))
    if rng is not None:
        rng.shuffle(order)
    for start in range(0, len(order), batch_size):
        chunk = [fd.examples[i] for i in order[start : start + batch_size]]
        yield pack_batch(fd, chunk)


# -- feature cache -----------------------------------------------------------


def save_entity_features(cache_dir, kind, entity_id, features):
    """One npz per entity, tagged with the featurization version."""
    folder = os.path.join(cache_dir, kind)
    os.makedirs(folder, exist_ok=True)
    path = os.path.join(folder, f"{entity_id}.npz")
    tmp = path + ".tmp"
    with open(tmp, "wb") as fh:
        np.savez(
            fh,
            node_features=features.node_features,
            edges=features.edges,
            fp=features.fp,
            version=np.frombuffer(FEATURIZATION_VERSION.encode(), dtype=np.uint8),
        )
    os.replace(tmp, path)
    return path


def load_entity_features(cache_dir, kind, entity_id):
    path = os.path.join(cache_dir, kind, f"{entity_id}.npz")
    if not os.path.exists(path):
        raise FileNotFoundError(f"no cached features for {kind[:-1]} {entity_id}")
    with np.load(path) as data:
        version = bytes(data["version"]).decode()
        if version != FEATURIZATION_VERSION:
            raise ValueError(
                f"cached features for {entity_id} use featurization {version}, "
                f"current is {FEATURIZATION_VERSION}; re-run featurize"
            )
        return EntityFeatures(
            node_features=data["node_features"],
            edges=data["edges"].astype(np.int64).reshape(-1, 2),
            fp=data["fp"],
        )
