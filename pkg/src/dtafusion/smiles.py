"""Native SMILES parser with chemical perception.

Covers the SMILES dialect found in drug-like datasets: organic-subset and
bracket atoms, charges, isotopes (parsed, ignored), stereo markers (parsed,
ignored), branches, ring closures incl. %nn, dot-separated components,
aromatic lowercase notation, and Kekulé input.

Perception pipeline after the syntactic parse:

1. ring-bond detection (a bond is in a ring iff it is not a bridge),
2. bond order resolution (an unwritten bond between two aromatic-input atoms
   is aromatic only when it lies in a ring, else single — biphenyl rule),
3. implicit hydrogen completion (Daylight valence rules; aromatic-input atoms
   reserve one valence for the pi system on B/C/N/P),
4. Hueckel aromatization of Kekulé-written rings (smallest ring per ring
   bond, sizes up to 7, iterated so fused systems converge), normalizing the
   bonds of aromatic rings to the AROMATIC order,
5. explicit [H] neighbors folded into the heavy atom's hydrogen count.

Aromatic bonds carry order 1.5 (``AROMATIC_ORDER``). Atom indices follow
SMILES token order.
"""

import re
from dataclasses import dataclass

AROMATIC_ORDER = 1.5

_ORGANIC_TWO = ("Cl", "Br")
_ORGANIC_ONE = set("BCNOPSFI")
_AROMATIC_ORGANIC = set("bcnops")
_AROMATIC_BRACKET = {"b", "c", "n", "o", "p", "s", "se", "as", "te"}

_ELEMENTS = {
    "H", "He", "Li", "Be", "B", "C", "N", "O", "F", "Ne", "Na", "Mg", "Al",
    "Si", "P", "S", "Cl", "Ar", "K", "Ca", "Sc", "Ti", "V", "Cr", "Mn", "Fe",
    "Co", "Ni", "Cu", "Zn", "Ga", "Ge", "As", "Se", "Br", "Kr", "Rb", "Sr",
    "Y", "Zr", "Nb", "Mo", "Tc", "Ru", "Rh", "Pd", "Ag", "Cd", "In", "Sn",
    "Sb", "Te", "I", "Xe", "Cs", "Ba", "La", "Ce", "Gd", "Yb", "W", "Re",
    "Os", "Ir", "Pt", "Au", "Hg", "Tl", "Pb", "Bi", "*",
}

# Normal valences, smallest first; organic-subset hydrogen filling picks the
# smallest valence that covers the written bonds.
_VALENCES = {
    "B": (3,), "C": (4,), "N": (3, 5), "O": (2,), "P": (3, 5),
    "S": (2, 4, 6), "F": (1,), "Cl": (1,), "Br": (1,), "I": (1,),
}

# Valence reserved for the aromatic pi system when filling hydrogens on
# aromatic-input atoms; O/S/Se contribute a lone pair instead.
_PI_RESERVE = {"B": 1, "C": 1, "N": 1, "P": 1, "As": 1, "O": 0, "S": 0, "Se": 0, "Te": 0}

_AROMATIC_CAPABLE = {"B", "C", "N", "O", "P", "S", "Se", "As", "Te"}

_BRACKET_RE = re.compile(
    r"^(?P<iso>\d+)?"
    r"(?P<sym>se|as|te|[A-Z][a-z]?|[bcnops]|\*)"
    r"(?P<chiral>@{1,2}(?:TH\d|AL\d|SP\d|TB\d{1,2}|OH\d{1,2})?)?"
    r"(?P<h>H\d*)?"
    r"(?P<chg>\+\d+|-\d+|\++|-+)?"
    r"(?::(?P<cls>\d+))?$"
)


class SmilesError(ValueError):
    """Invalid SMILES; message carries the offending position or atom."""


@dataclass
class Atom:
    """Perceived atom: the graph/fingerprint-facing view."""

    symbol: str
    degree: int = 0
    total_hydrogens: int = 0
    implicit_valence: int = 0
    is_aromatic: bool = False
    charge: int = 0
    in_ring: bool = False


@dataclass
class Molecule:
    """Perceived molecule: atoms plus undirected bonds with orders."""

    atoms: list
    bonds: list  # (i, j, order) with i < j; order 1.0/2.0/3.0/AROMATIC_ORDER
    smiles: str = ""

    @property
    def num_atoms(self):
        return len(self.atoms)

    @property
    def num_bonds(self):
        return len(self.bonds)

    @property
    def aromatic_atom_count(self):
        return sum(1 for a in self.atoms if a.is_aromatic)

    def neighbors(self):
        """Adjacency list of (neighbor index, bond order) pairs."""
        adj = [[] for _ in self.atoms]
        for i, j, order in self.bonds:
            adj[i].append((j, order))
            adj[j].append((i, order))
        return adj


class _ParsedAtom:
    __slots__ = ("symbol", "aromatic", "charge", "bracket_h", "bracket", "pos")

    def __init__(self, symbol, aromatic, charge, bracket_h, bracket, pos):
        self.symbol = symbol
        self.aromatic = aromatic
        self.charge = charge
        self.bracket_h = bracket_h  # None for organic-subset atoms
        self.bracket = bracket
        self.pos = pos


def _parse_bracket(body, pos):
    m = _BRACKET_RE.match(body)
    if not m:
        raise SmilesError(f"malformed bracket atom '[{body}]' at position {pos}")
    sym = m.group("sym")
    aromatic = sym[0].islower() and sym != "*"
    if aromatic and sym not in _AROMATIC_BRACKET:
        raise SmilesError(f"'{sym}' cannot be aromatic at position {pos}")
    symbol = sym if sym == "*" else sym.capitalize()
    if symbol not in _ELEMENTS:
        raise SmilesError(f"unknown element '{sym}' at position {pos}")
    h = m.group("h")
    hcount = 0 if h is None else (1 if h == "H" else int(h[1:]))
    chg = m.group("chg")
    if chg is None:
        charge = 0
    elif chg in ("+", "-") or chg[0] in "+-" and chg == chg[0] * len(chg):
        charge = len(chg) if chg[0] == "+" else -len(chg)
    else:
        charge = int(chg)
    return _ParsedAtom(symbol, aromatic, charge, hcount, True, pos)


def _tokenize_and_link(smiles):
    """Syntactic pass: returns (parsed atoms, raw bonds (a, b, symbol, pos))."""
    atoms = []
    bonds = []
    seen_pairs = set()
    stack = []
    prev = None
    pending = None  # (symbol, pos)
    ring_open = {}
    i = 0
    n = len(smiles)

    def attach(atom_idx, pos):
        nonlocal prev, pending
        if prev is not None:
            _add_bond(bonds, seen_pairs, prev, atom_idx, pending[0] if pending else None, pos)
        elif pending is not None:
            raise SmilesError(f"bond symbol with no preceding atom at position {pending[1]}")
        pending = None
        prev = atom_idx

    while i < n:
        c = smiles[i]
        if c == "(":
            if prev is None:
                raise SmilesError(f"branch start before any atom at position {i}")
            if pending is not None:
                raise SmilesError(f"bond symbol before '(' at position {i}")
            stack.append(prev)
            i += 1
        elif c == ")":
            if not stack:
                raise SmilesError(f"unmatched ')' at position {i}")
            if pending is not None:
                raise SmilesError(f"dangling bond before ')' at position {i}")
            prev = stack.pop()
            i += 1
        elif c in "-=#$:/\\":
            if pending is not None:
                raise SmilesError(f"two consecutive bond symbols at position {i}")
            pending = (c, i)
            i += 1
        elif c == ".":
            if pending is not None:
                raise SmilesError(f"bond symbol before '.' at position {i}")
            prev = None
            i += 1
        elif c.isdigit() or c == "%":
            if c == "%":
                if i + 2 >= n or not smiles[i + 1 : i + 3].isdigit():
                    raise SmilesError(f"'%' needs two digits at position {i}")
                num = int(smiles[i + 1 : i + 3])
                i += 3
            else:
                num = int(c)
                i += 1
            if prev is None:
                raise SmilesError(f"ring closure before any atom at position {i - 1}")
            sym = pending[0] if pending else None
            if num in ring_open:
                other, other_sym = ring_open.pop(num)
                if other == prev:
                    raise SmilesError(f"ring closure {num} bonds atom to itself at position {i - 1}")
                if sym and other_sym and sym != other_sym:
                    raise SmilesError(f"conflicting bond symbols on ring closure {num}")
                _add_bond(bonds, seen_pairs, other, prev, sym or other_sym, i - 1)
            else:
                ring_open[num] = (prev, sym)
            pending = None
        elif c == "[":
            end = smiles.find("]", i)
            if end < 0:
                raise SmilesError(f"unclosed '[' at position {i}")
            atom = _parse_bracket(smiles[i + 1 : end], i)
            atoms.append(atom)
            attach(len(atoms) - 1, i)
            i = end + 1
        else:
            two = smiles[i : i + 2]
            if two in _ORGANIC_TWO:
                atoms.append(_ParsedAtom(two, False, 0, None, False, i))
                attach(len(atoms) - 1, i)
                i += 2
            elif c in _ORGANIC_ONE:
                atoms.append(_ParsedAtom(c, False, 0, None, False, i))
                attach(len(atoms) - 1, i)
                i += 1
            elif c in _AROMATIC_ORGANIC:
                atoms.append(_ParsedAtom(c.upper(), True, 0, None, False, i))
                attach(len(atoms) - 1, i)
                i += 1
            else:
                raise SmilesError(f"unexpected character {c!r} at position {i}")

    if pending is not None:
        raise SmilesError(f"dangling bond symbol at position {pending[1]}")
    if stack:
        raise SmilesError("unbalanced branch: missing ')'")
    if ring_open:
        nums = sorted(ring_open)
        raise SmilesError(f"unclosed ring closure(s): {nums}")
    if not atoms:
        raise SmilesError("no atoms in SMILES")
    return atoms, bonds


def _add_bond(bonds, seen_pairs, a, b, sym, pos):
    key = (min(a, b), max(a, b))
    if key in seen_pairs:
        raise SmilesError(f"duplicate bond between atoms {a} and {b} at position {pos}")
    seen_pairs.add(key)
    bonds.append([a, b, sym, pos])


def _ring_bond_flags(n_atoms, bonds):
    """bond-in-ring flags via bridge detection (a non-bridge edge is in a cycle)."""
    adj = [[] for _ in range(n_atoms)]
    for bi, (a, b, _sym, _pos) in enumerate(bonds):
        adj[a].append((b, bi))
        adj[b].append((a, bi))
    visited = [False] * n_atoms
    disc = [0] * n_atoms
    low = [0] * n_atoms
    is_bridge = [False] * len(bonds)
    timer = [0]

    for root in range(n_atoms):
        if visited[root]:
            continue
        stack = [(root, -1, iter(adj[root]))]
        visited[root] = True
        disc[root] = low[root] = timer[0]
        timer[0] += 1
        while stack:
            node, in_edge, it = stack[-1]
            advanced = False
            for nbr, bi in it:
                if bi == in_edge:
                    continue
                if not visited[nbr]:
                    visited[nbr] = True
                    disc[nbr] = low[nbr] = timer[0]
                    timer[0] += 1
                    stack.append((nbr, bi, iter(adj[nbr])))
                    advanced = True
                    break
                low[node] = min(low[node], disc[nbr])
            if not advanced:
                stack.pop()
                if stack:
                    parent = stack[-1][0]
                    low[parent] = min(low[parent], low[node])
                    if low[node] > disc[parent]:
                        is_bridge[in_edge] = True
        # per-root loop continues for disconnected components
    return [not b for b in is_bridge]


def _resolve_orders(atoms, bonds, in_ring):
    """Map bond symbols to numeric orders; unwritten aromatic-pair ring bonds
    become aromatic, everything else unwritten is single."""
    orders = []
    for (a, b, sym, pos), ring in zip(bonds, in_ring):
        if sym is None:
            if atoms[a].aromatic and atoms[b].aromatic and ring:
                orders.append(AROMATIC_ORDER)
            else:
                orders.append(1.0)
        elif sym in ("-", "/", "\\"):
            orders.append(1.0)
        elif sym == "=":
            orders.append(2.0)
        elif sym == "#":
            orders.append(3.0)
        elif sym == "$":
            orders.append(4.0)
        else:  # ':'
            orders.append(AROMATIC_ORDER)
    return orders


def _implicit_hydrogens(atoms, bonds, orders):
    """Daylight implicit-H rules for organic-subset atoms; bracket atoms get
    exactly their written hcount."""
    sums = [0.0] * len(atoms)
    int_sums = [0] * len(atoms)  # aromatic counted as 1
    for (a, b, _sym, _pos), order in zip(bonds, orders):
        sums[a] += order
        sums[b] += order
        step = 1 if order == AROMATIC_ORDER else int(order)
        int_sums[a] += step
        int_sums[b] += step

    implicit = [0] * len(atoms)
    for idx, atom in enumerate(atoms):
        if atom.bracket:
            continue
        valences = _VALENCES[atom.symbol]
        if atom.aromatic:
            total = int_sums[idx]
            fitting = [v for v in valences if v >= total]
            if not fitting:
                raise SmilesError(
                    f"valence violation on aromatic atom {idx} "
                    f"({atom.symbol}, position {atom.pos})"
                )
            reserve = _PI_RESERVE.get(atom.symbol, 1)
            implicit[idx] = max(0, fitting[0] - total - reserve)
        else:
            total = int(-(-sums[idx] // 1))  # ceil
            fitting = [v for v in valences if v >= total]
            if not fitting:
                raise SmilesError(
                    f"valence violation on atom {idx} "
                    f"({atom.symbol}, position {atom.pos}): bond order sum {sums[idx]}"
                )
            implicit[idx] = fitting[0] - total
    return implicit


def _smallest_rings(n_atoms, bonds, in_ring, max_size=7):
    """One smallest cycle per ring bond (BFS avoiding the bond), deduped."""
    adj = [[] for _ in range(n_atoms)]
    for bi, (a, b, _sym, _pos) in enumerate(bonds):
        adj[a].append((b, bi))
        adj[b].append((a, bi))
    rings = []
    seen = set()
    for bi, (a, b, _sym, _pos) in enumerate(bonds):
        if not in_ring[bi]:
            continue
        # BFS from a to b without using bond bi
        parents = {a: None}
        queue = [a]
        found = False
        while queue and not found:
            nxt = []
            for node in queue:
                for nbr, ei in adj[node]:
                    if ei == bi or nbr in parents:
                        continue
                    parents[nbr] = node
                    if nbr == b:
                        found = True
                        break
                    nxt.append(nbr)
                if found:
                    break
            queue = nxt
        if not found:
            continue
        path = [b]
        while path[-1] != a:
            path.append(parents[path[-1]])
        if len(path) > max_size:
            continue
        key = frozenset(path)
        if key not in seen:
            seen.add(key)
            rings.append(path)  # cycle order: b ... a, closed by bond (a, b)
    return rings


def _aromatize(atoms, bonds, orders, implicit, rings):
    """Iterated per-ring Hueckel perception; marks atoms and normalizes the
    accepted rings' bonds to the aromatic order."""
    n = len(atoms)
    degree = [0] * n
    for a, b, _sym, _pos in bonds:
        degree[a] += 1
        degree[b] += 1
    hcount = [
        (atom.bracket_h if atom.bracket else implicit[i]) for i, atom in enumerate(atoms)
    ]
    aromatic = [atom.aromatic for atom in atoms]
    bond_index = {}
    for bi, (a, b, _sym, _pos) in enumerate(bonds):
        bond_index[(a, b)] = bi
        bond_index[(b, a)] = bi

    def pi_contribution(idx, ring_set):
        atom = atoms[idx]
        if atom.symbol not in _AROMATIC_CAPABLE:
            return None
        if degree[idx] + hcount[idx] > 3:
            return None
        doubles = []
        for (a, b, _sym, _pos), order in zip(bonds, orders):
            if order == 3.0 and idx in (a, b):
                return None
            if order == 2.0 and idx in (a, b):
                doubles.append(b if a == idx else a)
        if any(d in ring_set for d in doubles):
            return 1
        if doubles:
            if any(aromatic[d] for d in doubles):
                return 1
            return 0 if atom.symbol == "C" else 1
        if atom.symbol == "C":
            if atom.charge < 0:
                return 2
            if atom.charge > 0:
                return 0
            # a carbon whose double bond was already normalized to aromatic
            return 1 if aromatic[idx] else None
        if atom.symbol == "B":
            return 0
        return 2  # heteroatom lone pair

    changed = True
    while changed:
        changed = False
        for ring in rings:
            ring_set = set(ring)
            if all(aromatic[i] for i in ring):
                continue
            pis = [pi_contribution(i, ring_set) for i in ring]
            if any(p is None for p in pis):
                continue
            if (sum(pis) - 2) % 4 != 0:
                continue
            for i in ring:
                aromatic[i] = True
            for a, b in zip(ring, ring[1:] + ring[:1]):
                orders[bond_index[(a, b)]] = AROMATIC_ORDER
            changed = True

    for idx, atom in enumerate(atoms):
        atom.aromatic = aromatic[idx]


def parse_smiles(smiles):
    """Parse a SMILES string into a perceived Molecule.

    Raises SmilesError on syntax or valence problems, reporting the offending
    position/atom.
    """
    if not smiles or not smiles.strip():
        raise SmilesError("empty SMILES string")
    smiles = smiles.strip()
    parsed, raw_bonds = _tokenize_and_link(smiles)
    ring_flags = _ring_bond_flags(len(parsed), raw_bonds)
    orders = _resolve_orders(parsed, raw_bonds, ring_flags)
    implicit = _implicit_hydrogens(parsed, raw_bonds, orders)
    rings = _smallest_rings(len(parsed), raw_bonds, ring_flags)
    _aromatize(parsed, raw_bonds, orders, implicit, rings)

    # Fold explicit [H] atoms into their heavy neighbor's hydrogen count.
    fold = set()
    extra_h = [0] * len(parsed)
    neighbor_count = [0] * len(parsed)
    for a, b, _sym, _pos in raw_bonds:
        neighbor_count[a] += 1
        neighbor_count[b] += 1
    for idx, atom in enumerate(parsed):
        if atom.symbol == "H" and atom.charge == 0 and neighbor_count[idx] == 1:
            for (a, b, _sym, _pos), order in zip(raw_bonds, orders):
                if idx in (a, b) and order == 1.0:
                    partner = b if a == idx else a
                    if parsed[partner].symbol != "H":
                        fold.add(idx)
                        extra_h[partner] += 1

    remap = {}
    atoms = []
    for idx, atom in enumerate(parsed):
        if idx in fold:
            continue
        remap[idx] = len(atoms)
        h = (atom.bracket_h if atom.bracket else implicit[idx]) + extra_h[idx]
        atoms.append(
            Atom(
                symbol=atom.symbol,
                total_hydrogens=h,
                implicit_valence=0 if atom.bracket else implicit[idx],
                is_aromatic=atom.aromatic,
                charge=atom.charge,
            )
        )

    final_bonds = []
    for (a, b, _sym, _pos), order, ring in zip(raw_bonds, orders, ring_flags):
        if a in fold or b in fold:
            continue
        i, j = remap[a], remap[b]
        if i > j:
            i, j = j, i
        final_bonds.append((i, j, order))
        atoms[i].degree += 1
        atoms[j].degree += 1
        if ring:
            atoms[i].in_ring = True
            atoms[j].in_ring = True

    return Molecule(atoms=atoms, bonds=final_bonds, smiles=smiles)
