"""KIBA-style dataset loading, filtering, splitting, structure fetching, and
curated-bundle export.

File formats (tab-separated, one header line):

- drugs:      ``drug_id\tsmiles``
- proteins:   ``protein_id\tuniprot\tsequence``
- affinities: ``drug_id\tprotein_id\tkiba_score``

Scores are ingested verbatim (in the KIBA convention used here, larger means
weaker binding). Structures come from the public AlphaFold-DB file endpoint,
``AF-{accession}-F1-model_v{N}.pdb``, newest model version first, cached under
their remote filename.
"""

import hashlib
import json
import logging
import math
import os
import shutil
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .aadata import AA_ALPHABET, NONSTANDARD_AA

logger = logging.getLogger(__name__)

ALPHAFOLD_URL = "https://alphafold.ebi.ac.uk/files/AF-{accession}-F1-model_v{version}.pdb"
ALPHAFOLD_MODEL_VERSIONS = (6, 5, 4, 3, 2, 1)

_VALID_RESIDUES = set(AA_ALPHABET) | NONSTANDARD_AA


class DataError(ValueError):
    """Malformed dataset content; messages carry file/line context."""


class StructureNotFoundError(KeyError):
    """No AlphaFold-DB model exists for the accession."""


@dataclass(frozen=True)
class DrugRecord:
    drug_id: str
    smiles: str


@dataclass(frozen=True)
class ProteinRecord:
    protein_id: str
    uniprot_accession: str
    sequence: str


@dataclass(frozen=True)
class AffinityExample:
    drug_id: str
    protein_id: str
    kiba_score: float


@dataclass(frozen=True)
class Dataset:
    """Immutable drug/protein/affinity triple store with referential integrity."""

    drugs: tuple
    proteins: tuple
    examples: tuple

    def __post_init__(self):
        drug_ids = [d.drug_id for d in self.drugs]
        prot_ids = [p.protein_id for p in self.proteins]
        if len(set(drug_ids)) != len(drug_ids):
            raise DataError("duplicate drug_id in dataset")
        if len(set(prot_ids)) != len(prot_ids):
            raise DataError("duplicate protein_id in dataset")
        dset, pset = set(drug_ids), set(prot_ids)
        seen = set()
        for ex in self.examples:
            if ex.drug_id not in dset:
                raise DataError(f"affinity references unknown drug_id {ex.drug_id!r}")
            if ex.protein_id not in pset:
                raise DataError(
                    f"affinity references unknown protein_id {ex.protein_id!r}"
                )
            key = (ex.drug_id, ex.protein_id)
            if key in seen:
                raise DataError(f"duplicate (drug, protein) pair {key}")
            seen.add(key)
            if not math.isfinite(ex.kiba_score):
                raise DataError(f"non-finite kiba_score for pair {key}")

    @property
    def drug_map(self):
        return {d.drug_id: d for d in self.drugs}

    @property
    def protein_map(self):
        return {p.protein_id: p for p in self.proteins}

    def summary(self):
        return (
            f"{len(self.drugs)} drugs, {len(self.proteins)} proteins, "
            f"{len(self.examples)} affinities"
        )


@dataclass(frozen=True)
class SplitSpec:
    seed: int = 42
    test_fraction: float = 1.0 / 6.0

    def __post_init__(self):
        if not 0.0 < self.test_fraction < 1.0:
            raise ValueError(f"test_fraction must be in (0, 1), got {self.test_fraction}")


def _read_tsv(path, expected_header):
    if not os.path.exists(path):
        raise DataError(f"missing file: {path}")
    rows = []
    with open(path, encoding="utf-8") as fh:
        header = fh.readline().rstrip("\n")
        if header.split("\t") != expected_header:
            raise DataError(
                f"{path}: expected header {expected_header}, got {header.split(chr(9))}"
            )
        for lineno, line in enumerate(fh, start=2):
            line = line.rstrip("\n")
            if not line:
                continue
            fields = line.split("\t")
            if len(fields) != len(expected_header):
                raise DataError(
                    f"{path}:{lineno}: expected {len(expected_header)} fields, "
                    f"got {len(fields)}"
                )
            rows.append((lineno, fields))
    return rows


def load_kiba(affinity_path, drugs_path, proteins_path):
    """Load and validate the three dataset files into a Dataset."""
    drugs = []
    for lineno, (drug_id, smiles) in _read_tsv(drugs_path, ["drug_id", "smiles"]):
        if not smiles:
            raise DataError(f"{drugs_path}:{lineno}: empty smiles")
        drugs.append(DrugRecord(drug_id=drug_id, smiles=smiles))
    proteins = []
    for lineno, (protein_id, uniprot, sequence) in _read_tsv(
        proteins_path, ["protein_id", "uniprot", "sequence"]
    ):
        if not sequence:
            raise DataError(f"{proteins_path}:{lineno}: empty sequence")
        bad = set(sequence.upper()) - _VALID_RESIDUES
        if bad:
            raise DataError(
                f"{proteins_path}:{lineno}: invalid residue symbol(s) {sorted(bad)}"
            )
        proteins.append(
            ProteinRecord(
                protein_id=protein_id, uniprot_accession=uniprot, sequence=sequence.upper()
            )
        )
    examples = []
    for lineno, (drug_id, protein_id, score) in _read_tsv(
        affinity_path, ["drug_id", "protein_id", "kiba_score"]
    ):
        try:
            value = float(score)
        except ValueError:
            raise DataError(f"{affinity_path}:{lineno}: unparseable kiba_score {score!r}")
        examples.append(
            AffinityExample(drug_id=drug_id, protein_id=protein_id, kiba_score=value)
        )
    return Dataset(drugs=tuple(drugs), proteins=tuple(proteins), examples=tuple(examples))


def filter_min_interactions(ds, min_count):
    """Keep only drugs/proteins with >= min_count interactions, iterating to a
    fixed point (dropping a drug can push a protein below threshold)."""
    if min_count < 1:
        raise ValueError(f"min_count must be >= 1, got {min_count}")
    examples = list(ds.examples)
    while True:
        drug_counts = {}
        prot_counts = {}
        for ex in examples:
            drug_counts[ex.drug_id] = drug_counts.get(ex.drug_id, 0) + 1
            prot_counts[ex.protein_id] = prot_counts.get(ex.protein_id, 0) + 1
        keep_drugs = {d for d, c in drug_counts.items() if c >= min_count}
        keep_prots = {p for p, c in prot_counts.items() if c >= min_count}
        kept = [
            ex
            for ex in examples
            if ex.drug_id in keep_drugs and ex.protein_id in keep_prots
        ]
        if len(kept) == len(examples):
            break
        examples = kept
    if not examples:
        raise DataError(f"filtering at min_count={min_count} removed every example")
    drug_ids = {ex.drug_id for ex in examples}
    prot_ids = {ex.protein_id for ex in examples}
    return Dataset(
        drugs=tuple(d for d in ds.drugs if d.drug_id in drug_ids),
        proteins=tuple(p for p in ds.proteins if p.protein_id in prot_ids),
        examples=tuple(examples),
    )


def _restrict(ds, examples):
    drug_ids = {ex.drug_id for ex in examples}
    prot_ids = {ex.protein_id for ex in examples}
    return Dataset(
        drugs=tuple(d for d in ds.drugs if d.drug_id in drug_ids),
        proteins=tuple(p for p in ds.proteins if p.protein_id in prot_ids),
        examples=tuple(examples),
    )


def split_dataset(ds, spec):
    """Deterministic seeded example-level split. |test| rounds half up."""
    if not ds.examples:
        raise DataError("cannot split an empty dataset")
    n = len(ds.examples)
    n_test = int(math.floor(spec.test_fraction * n + 0.5))
    n_test = min(max(n_test, 1), n - 1)
    order = np.random.default_rng(spec.seed).permutation(n)
    test_idx = set(order[:n_test].tolist())
    test = [ds.examples[i] for i in sorted(test_idx)]
    train = [ds.examples[i] for i in range(n) if i not in test_idx]
    return _restrict(ds, train), _restrict(ds, test)


# -- structure fetching --------------------------------------------------------


def _default_http_get(url, timeout=30.0):
    """GET returning (status_code, body bytes); network errors raise."""
    import requests

    resp = requests.get(url, timeout=timeout)
    return resp.status_code, resp.content


def fetch_structure(
    accession,
    cache_dir,
    http_get=_default_http_get,
    model_versions=ALPHAFOLD_MODEL_VERSIONS,
    max_attempts=3,
    backoff=1.0,
):
    """Path to a cached AlphaFold-DB PDB file for the accession.

    A cache hit (any model version, newest preferred) makes no network
    request. Downloads are atomic (temp file + rename). 404s walk to the next
    older model version; transient errors retry up to ``max_attempts`` with
    exponential backoff.
    """
    os.makedirs(cache_dir, exist_ok=True)
    for version in model_versions:
        cached = os.path.join(cache_dir, f"AF-{accession}-F1-model_v{version}.pdb")
        if os.path.exists(cached):
            return cached

    last_error = None
    for version in model_versions:
        url = ALPHAFOLD_URL.format(accession=accession, version=version)
        for attempt in range(max_attempts):
            try:
                status, body = http_get(url)
            except Exception as exc:
                last_error = exc
                if attempt + 1 < max_attempts:
                    time.sleep(backoff * 2**attempt)
                continue
            if status == 200:
                target = os.path.join(
                    cache_dir, f"AF-{accession}-F1-model_v{version}.pdb"
                )
                tmp = target + f".tmp.{os.getpid()}"
                with open(tmp, "wb") as fh:
                    fh.write(body)
                os.replace(tmp, target)
                return target
            if status == 404:
                break  # try the next older model version
            last_error = RuntimeError(f"HTTP {status} for {url}")
            if attempt + 1 < max_attempts:
                time.sleep(backoff * 2**attempt)
        else:
            raise ConnectionError(
                f"failed to fetch structure for {accession} after "
                f"{max_attempts} attempts: {last_error}"
            )
    if last_error is not None:
        raise ConnectionError(
            f"failed to fetch structure for {accession}: {last_error}"
        )
    raise StructureNotFoundError(
        f"no AlphaFold-DB model found for accession {accession!r}"
    )


def fetch_structures(accessions, cache_dir, http_get=_default_http_get, workers=4):
    """Concurrent fetch with bounded parallelism; returns accession -> path."""
    results = {}
    with ThreadPoolExecutor(max_workers=workers) as pool:
        futures = {
            acc: pool.submit(fetch_structure, acc, cache_dir, http_get)
            for acc in dict.fromkeys(accessions)
        }
        for acc, future in futures.items():
            results[acc] = future.result()
    return results


def find_structure_file(structure_dir, accession):
    """Newest cached model file for an accession, or None."""
    for version in ALPHAFOLD_MODEL_VERSIONS:
        path = os.path.join(structure_dir, f"AF-{accession}-F1-model_v{version}.pdb")
        if os.path.exists(path):
            return path
    return None


# -- curated bundle ------------------------------------------------------------


def _sha256_file(path):
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(65536), b""):
            h.update(chunk)
    return h.hexdigest()


def export_curated_bundle(ds, structure_dir, out_dir):
    """Write the three dataset files, every protein's structure file, and a
    manifest of {filename, sha256, size_bytes}; returns the manifest path."""
    missing = [
        p.protein_id
        for p in ds.proteins
        if find_structure_file(structure_dir, p.uniprot_accession) is None
    ]
    if missing:
        raise DataError(f"missing structure file(s) for protein(s): {missing}")

    os.makedirs(out_dir, exist_ok=True)
    with open(os.path.join(out_dir, "drugs.tsv"), "w", encoding="utf-8") as fh:
        fh.write("drug_id\tsmiles\n")
        for d in sorted(ds.drugs, key=lambda r: r.drug_id):
            fh.write(f"{d.drug_id}\t{d.smiles}\n")
    with open(os.path.join(out_dir, "proteins.tsv"), "w", encoding="utf-8") as fh:
        fh.write("protein_id\tuniprot\tsequence\n")
        for p in sorted(ds.proteins, key=lambda r: r.protein_id):
            fh.write(f"{p.protein_id}\t{p.uniprot_accession}\t{p.sequence}\n")
    with open(os.path.join(out_dir, "affinities.tsv"), "w", encoding="utf-8") as fh:
        fh.write("drug_id\tprotein_id\tkiba_score\n")
        for ex in sorted(ds.examples, key=lambda e: (e.drug_id, e.protein_id)):
            fh.write(f"{ex.drug_id}\t{ex.protein_id}\t{ex.kiba_score!r}\n")

    filenames = ["drugs.tsv", "proteins.tsv", "affinities.tsv"]
    for p in sorted(ds.proteins, key=lambda r: r.protein_id):
        src = find_structure_file(structure_dir, p.uniprot_accession)
        name = os.path.basename(src)
        dst = os.path.join(out_dir, name)
        if os.path.abspath(src) != os.path.abspath(dst):
            shutil.copyfile(src, dst)
        if name not in filenames:
            filenames.append(name)

    manifest = [
        {
            "filename": name,
            "sha256": _sha256_file(os.path.join(out_dir, name)),
            "size_bytes": os.path.getsize(os.path.join(out_dir, name)),
        }
        for name in filenames
    ]
    manifest_path = os.path.join(out_dir, "manifest.json")
    tmp = manifest_path + ".tmp"
    with open(tmp, "w", encoding="utf-8") as fh:
        json.dump(manifest, fh, indent=2)
        fh.write("\n")
    os.replace(tmp, manifest_path)
    return manifest_path
