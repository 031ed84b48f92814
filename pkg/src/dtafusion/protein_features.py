"""Sequence-only protein descriptors.

Three classical descriptors computed from the one-letter residue sequence:

- k-mer amino acid composition for k = 1, 2, 3 (20 + 400 + 8000 = 8420 dims),
- conjoint triad over the 7-class reduced alphabet (7^3 = 343 dims),
- quasi-sequence-order with two residue distance matrices
  ((20 + nlag) * 2 = 100 dims at the default nlag = 30),

plus their concatenation (8863 dims). All are deterministic pure functions of
the sequence. Nonstandard residues (X, B, Z, U, O) are dropped with a warning
before computation; any other symbol is an error.
"""

import logging
from dataclasses import dataclass, field

import numpy as np

from .aadata import (
    AA_ALPHABET,
    AA_INDEX,
    NONSTANDARD_AA,
    grantham_distance_matrix,
    schneider_wrede_distance_matrix,
)

logger = logging.getLogger(__name__)

AAC_DIM = 8420
CTRIAD_DIM = 343
QSORDER_DIM = 100
PROTEIN_FP_DIM = AAC_DIM + CTRIAD_DIM + QSORDER_DIM  # 8863
MORGAN_DIM = 1024
DAYLIGHT_DIM = 2048
DRUG_FP_DIM = MORGAN_DIM + DAYLIGHT_DIM  # 3072

FEATURE_LENGTHS = {
    "AAC": AAC_DIM,
    "CTRIAD": CTRIAD_DIM,
    "QSORDER": QSORDER_DIM,
    "PROTEIN_CONCAT": PROTEIN_FP_DIM,
    "MORGAN": MORGAN_DIM,
    "DAYLIGHT": DAYLIGHT_DIM,
    "DRUG_CONCAT": DRUG_FP_DIM,
}

_NONNEGATIVE_KINDS = {"AAC", "CTRIAD", "QSORDER", "PROTEIN_CONCAT"}

# Conjoint triad classes, in index order 0..6.
CTRIAD_CLASSES = ("AGV", "ILFP", "YMTS", "HNQW", "RK", "DE", "C")
_CTRIAD_CLASS_OF = {aa: ci for ci, group in enumerate(CTRIAD_CLASSES) for aa in group}

_SW_MATRIX = schneider_wrede_distance_matrix()
_GRANTHAM_MATRIX = grantham_distance_matrix()


@dataclass(frozen=True)
class FeatureVector:
    """Fixed-length continuous descriptor tagged with its kind."""

    values: np.ndarray
    kind: str
    expected_length: int | None = field(default=None, repr=False)

    def __post_init__(self):
        if self.kind not in FEATURE_LENGTHS:
            raise ValueError(f"unknown feature kind {self.kind!r}")
        expected = self.expected_length or FEATURE_LENGTHS[self.kind]
        if self.values.shape != (expected,):
            raise ValueError(
                f"{self.kind} vector must have length {expected}, "
                f"got shape {self.values.shape}"
            )
        if not np.all(np.isfinite(self.values)):
            raise ValueError(f"{self.kind} vector contains non-finite entries")
        if self.kind in _NONNEGATIVE_KINDS and np.any(self.values < 0):
            raise ValueError(f"{self.kind} vector contains negative entries")

    def __len__(self):
        return self.values.shape[0]


def clean_sequence(sequence):
    """Uppercase, drop nonstandard residues (with a warning), validate the rest.

    Returns the cleaned sequence; raises ValueError on symbols outside the
    20-letter alphabet plus the nonstandard set.
    """
    seq = sequence.upper()
    dropped = sum(1 for c in seq if c in NONSTANDARD_AA)
    if dropped:
        logger.warning("dropping %d nonstandard residue(s) from sequence", dropped)
        seq = "".join(c for c in seq if c not in NONSTANDARD_AA)
    bad = set(seq) - set(AA_ALPHABET)
    if bad:
        raise ValueError(f"invalid residue symbol(s) {sorted(bad)} in sequence")
    return seq


def _codes(sequence):
    cleaned = clean_sequence(sequence)
    if not cleaned:
        raise ValueError("empty sequence (after dropping nonstandard residues)")
    return np.array([AA_INDEX[c] for c in cleaned], dtype=np.int64)


def aac_fingerprint(sequence):
    """Concatenated k-mer composition for k = 1, 2, 3 (8420 dims).

    Block k holds the frequency of each k-mer, count / (L - k + 1), with
    k-mers ordered lexicographically over ACDEFGHIKLMNPQRSTVWY. Blocks whose
    k exceeds the sequence length are all zeros.
    """
    codes = _codes(sequence)
    L = codes.shape[0]
    out = np.zeros(AAC_DIM)
    out[:20] = np.bincount(codes, minlength=20) / L
    if L >= 2:
        idx2 = codes[:-1] * 20 + codes[1:]
        out[20:420] = np.bincount(idx2, minlength=400) / (L - 1)
    if L >= 3:
        idx3 = codes[:-2] * 400 + codes[1:-1] * 20 + codes[2:]
        out[420:] = np.bincount(idx3, minlength=8000) / (L - 2)
    return FeatureVector(out, "AAC")


def ctriad_fingerprint(sequence):
    """Conjoint triad frequencies over the 7-class alphabet (343 dims).

    Entry (c1, c2, c3) at index 49*c1 + 7*c2 + c3 is the count of that class
    triad among the L-2 overlapping triads, divided by L-2.
    """
    cleaned = clean_sequence(sequence)
    L = len(cleaned)
    if L < 3:
        raise ValueError(f"conjoint triad needs sequence length >= 3, got {L}")
    cls = np.array([_CTRIAD_CLASS_OF[c] for c in cleaned], dtype=np.int64)
    idx = cls[:-2] * 49 + cls[1:-1] * 7 + cls[2:]
    out = np.bincount(idx, minlength=CTRIAD_DIM).astype(float) / (L - 2)
    return FeatureVector(out, "CTRIAD")


def _qso_block(codes, matrix_sq, nlag, weight):
    """One matrix's (20 + nlag) quasi-sequence-order block.

    comp_r = f_r / (1 + w * sum(tau)), coupling_d = w * tau_d / (1 + w * sum(tau)),
    where f_r are residue frequencies and tau_d = sum_j M[s_j, s_{j+d}]^2.
    """
    L = codes.shape[0]
    tau = np.array(
        [matrix_sq[codes[:-d], codes[d:]].sum() for d in range(1, nlag + 1)]
    )
    freq = np.bincount(codes, minlength=20) / L
    denom = 1.0 + weight * tau.sum()
    return np.concatenate([freq, weight * tau]) / denom


def qsorder_fingerprint(sequence, nlag=30, weight=0.1):
    """Quasi-sequence-order descriptor, (20 + nlag) * 2 dims (100 by default).

    Layout: [Schneider-Wrede composition | Schneider-Wrede coupling |
    Grantham composition | Grantham coupling], composition in
    ACDEFGHIKLMNPQRSTVWY order, coupling for lags 1..nlag. Each matrix's
    block sums to 1 by the 1 / (1 + w * sum(tau)) normalization.
    """
    codes = _codes(sequence)
    if codes.shape[0] <= nlag:
        raise ValueError(
            f"quasi-sequence-order needs sequence length > nlag={nlag} "
            f"(at least {nlag + 1}), got {codes.shape[0]}"
        )
    blocks = [
        _qso_block(codes, _SW_MATRIX**2, nlag, weight),
        _qso_block(codes, _GRANTHAM_MATRIX**2, nlag, weight),
    ]
    out = np.concatenate(blocks)
    return FeatureVector(out, "QSORDER", expected_length=(20 + nlag) * 2)


def protein_fingerprint(sequence):
    """Concatenation [AAC | CTRIAD | QSORDER], 8863 dims."""
    parts = [
        aac_fingerprint(sequence).values,
        ctriad_fingerprint(sequence).values,
        qsorder_fingerprint(sequence).values,
    ]
    return FeatureVector(np.concatenate(parts), "PROTEIN_CONCAT")
