"""Amino acid and element constant tables.

Every table here is fixed, published reference data; nothing is fit to a
dataset. Sources:

- ``AA_MOLECULAR_WEIGHT``: free amino acid average molecular weights (Da).
- ``AA_HYDROPATHY``: Kyte & Doolittle (1982) hydropathy index (the continuous
  solubility-adjacent residue feature).
- ``AA_POLAR``: binary polar/nonpolar flag. Polar = charged + polar-uncharged
  residues (R, N, D, C, E, Q, H, K, S, T, Y); G, A, V, L, I, P, F, M, W are
  nonpolar (tryptophan counted nonpolar).
- ``AA_PKA``: free amino acid pKa values (alpha-carboxyl, alpha-amino, side
  chain; 0.0 where the side chain is not ionizable), Lehninger-style table.
- ``GRANTHAM_PROPERTIES``: Grantham (1974) composition / polarity / volume,
  from which ``grantham_distance_matrix`` recomputes the published chemical
  distance matrix (mean scaled to 100; continuous, not integer-rounded).
- ``schneider_wrede_distance_matrix``: a physicochemical residue distance in
  the style of Schneider & Wrede (1994): range-normalized Euclidean distance
  over (hydropathy, polarity, volume), symmetric, zero diagonal, values in
  [0, 1]. The exact published values can be swapped in here if needed; the
  quasi-sequence-order descriptor only relies on the matrix's structure.
"""

import numpy as np

AA_ALPHABET = "ACDEFGHIKLMNPQRSTVWY"
AA_INDEX = {aa: i for i, aa in enumerate(AA_ALPHABET)}

# Residue symbols that may appear in sequences but have no descriptor/feature
# tables; the feature code drops them (with a warning) before computing.
NONSTANDARD_AA = set("XBZUO")

THREE_TO_ONE = {
    "ALA": "A", "ARG": "R", "ASN": "N", "ASP": "D", "CYS": "C",
    "GLN": "Q", "GLU": "E", "GLY": "G", "HIS": "H", "ILE": "I",
    "LEU": "L", "LYS": "K", "MET": "M", "PHE": "F", "PRO": "P",
    "SER": "S", "THR": "T", "TRP": "W", "TYR": "Y", "VAL": "V",
}

AA_MOLECULAR_WEIGHT = {
    "A": 89.09, "R": 174.20, "N": 132.12, "D": 133.10, "C": 121.16,
    "Q": 146.15, "E": 147.13, "G": 75.07, "H": 155.16, "I": 131.17,
    "L": 131.17, "K": 146.19, "M": 149.21, "F": 165.19, "P": 115.13,
    "S": 105.09, "T": 119.12, "W": 204.23, "Y": 181.19, "V": 117.15,
}

AA_HYDROPATHY = {
    "A": 1.8, "R": -4.5, "N": -3.5, "D": -3.5, "C": 2.5,
    "Q": -3.5, "E": -3.5, "G": -0.4, "H": -3.2, "I": 4.5,
    "L": 3.8, "K": -3.9, "M": 1.9, "F": 2.8, "P": -1.6,
    "S": -0.8, "T": -0.7, "W": -0.9, "Y": -1.3, "V": 4.2,
}

AA_POLAR = {
    "A": 0, "R": 1, "N": 1, "D": 1, "C": 1,
    "Q": 1, "E": 1, "G": 0, "H": 1, "I": 0,
    "L": 0, "K": 1, "M": 0, "F": 0, "P": 0,
    "S": 1, "T": 1, "W": 0, "Y": 1, "V": 0,
}

# (pKa alpha-COOH, pKa alpha-NH3+, pKa side chain or 0.0)
AA_PKA = {
    "A": (2.34, 9.69, 0.0),
    "R": (2.17, 9.04, 12.48),
    "N": (2.02, 8.80, 0.0),
    "D": (1.88, 9.60, 3.65),
    "C": (1.96, 10.28, 8.18),
    "Q": (2.17, 9.13, 0.0),
    "E": (2.19, 9.67, 4.25),
    "G": (2.34, 9.60, 0.0),
    "H": (1.82, 9.17, 6.00),
    "I": (2.36, 9.60, 0.0),
    "L": (2.36, 9.60, 0.0),
    "K": (2.18, 8.95, 10.53),
    "M": (2.28, 9.21, 0.0),
    "F": (1.83, 9.13, 0.0),
    "P": (1.99, 10.60, 0.0),
    "S": (2.21, 9.15, 0.0),
    "T": (2.09, 9.10, 0.0),
    "W": (2.83, 9.39, 0.0),
    "Y": (2.20, 9.11, 10.07),
    "V": (2.32, 9.62, 0.0),
}

# Grantham (1974): composition, polarity, volume.
GRANTHAM_PROPERTIES = {
    "A": (0.0, 8.1, 31.0), "R": (0.65, 10.5, 124.0), "N": (1.33, 11.6, 56.0),
    "D": (1.38, 13.0, 54.0), "C": (2.75, 5.5, 55.0), "Q": (0.89, 10.5, 85.0),
    "E": (0.92, 12.3, 83.0), "G": (0.74, 9.0, 3.0), "H": (0.58, 10.4, 96.0),
    "I": (0.0, 5.2, 111.0), "L": (0.0, 4.9, 111.0), "K": (0.33, 11.3, 119.0),
    "M": (0.0, 5.7, 105.0), "F": (0.0, 5.2, 132.0), "P": (0.39, 8.0, 32.5),
    "S": (1.42, 9.2, 32.0), "T": (0.71, 8.6, 61.0), "W": (0.13, 5.4, 170.0),
    "Y": (0.20, 6.2, 136.0), "V": (0.0, 5.9, 84.0),
}

# Average atomic masses (Da) for elements seen in protein heavy atoms plus
# common ions; hydrogens are excluded upstream.
ELEMENT_MASS = {
    "C": 12.011, "N": 14.007, "O": 15.999, "S": 32.06, "P": 30.974,
    "SE": 78.971, "F": 18.998, "CL": 35.45, "BR": 79.904, "I": 126.904,
    "NA": 22.990, "K": 39.098, "MG": 24.305, "CA": 40.078, "MN": 54.938,
    "FE": 55.845, "CO": 58.933, "NI": 58.693, "CU": 63.546, "ZN": 65.38,
    "B": 10.81, "SI": 28.085,
}


def grantham_distance_matrix():
    """20x20 Grantham chemical distance, rows/cols in AA_ALPHABET order.

    D_ij = rho * sqrt(a*(c_i-c_j)^2 + b*(p_i-p_j)^2 + g*(v_i-v_j)^2) with the
    original weights a=1.833, b=0.1018, g=0.000399 and rho scaling the mean of
    the 190 off-diagonal pair distances to 100.
    """
    a, b, g = 1.833, 0.1018, 0.000399
    props = np.array([GRANTHAM_PROPERTIES[aa] for aa in AA_ALPHABET])
    diff = props[:, None, :] - props[None, :, :]
    raw = np.sqrt(a * diff[..., 0] ** 2 + b * diff[..., 1] ** 2 + g * diff[..., 2] ** 2)
    iu = np.triu_indices(20, k=1)
    rho = 100.0 / raw[iu].mean()
    return rho * raw


def schneider_wrede_distance_matrix():
    """20x20 physicochemical residue distance in [0, 1], AA_ALPHABET order.

    Range-normalized Euclidean distance over hydropathy, Grantham polarity,
    and Grantham volume; see the module docstring for provenance.
    """
    scales = np.array(
        [
            [AA_HYDROPATHY[aa], GRANTHAM_PROPERTIES[aa][1], GRANTHAM_PROPERTIES[aa][2]]
            for aa in AA_ALPHABET
        ]
    )
    spans = scales.max(axis=0) - scales.min(axis=0)
    normed = (scales - scales.min(axis=0)) / spans
    diff = normed[:, None, :] - normed[None, :, :]
    return np.sqrt((diff**2).sum(axis=2) / 3.0)
