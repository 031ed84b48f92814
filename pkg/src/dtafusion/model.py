"""Four-branch affinity regression network.

Branches (concatenated in this fixed order when active):

- ``P_G``: protein residue graph -> 5 GIN blocks -> global mean pool ->
  linear + ReLU -> bottleneck (embed -> bottleneck -> embed),
- ``P_F``: 8863-dim protein descriptor -> strided 1D conv -> ReLU -> flatten
  -> linear,
- ``D_G``: drug molecular graph, same stack as ``P_G``,
- ``D_F``: 3072-dim drug fingerprint, same stack as ``P_F``,

followed by the fused regressor: [hidden + ReLU + dropout]* with a final
linear to one scalar. Branch inputs are deduplicated per batch (one forward
per unique protein/drug), with gather/scatter between unique entities and
examples.

All parameters initialize deterministically from ``ModelConfig.seed``.
"""

import dataclasses
import json
from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .drug_features import DRUG_NODE_DIM
from .featurize import FEATURIZATION_VERSION
from .nn import Adam, BatchNorm, Conv1d, Dense, Dropout, GINBlock, ReLU, SegmentMeanPool
from .protein_features import DRUG_FP_DIM, PROTEIN_FP_DIM
from .protein_graph import PROTEIN_NODE_DIM

BRANCHES = ("P_G", "P_F", "D_G", "D_F")


@dataclass(frozen=True)
class ModelConfig:
    """Architecture + init record; every field is echoed into result files."""

    active_branches: tuple = BRANCHES
    gin_hidden: int = 64
    gin_layers: int = 5
    branch_embed_dim: int = 128
    bottleneck_dim: int = 64
    conv_channels: int = 16
    conv_kernel: int = 8
    conv_stride: int = 4
    fusion_hidden: tuple = (1024, 512)
    dropout: float = 0.2
    seed: int = 42

    def __post_init__(self):
        branches = tuple(b for b in BRANCHES if b in set(self.active_branches))
        if set(self.active_branches) - set(BRANCHES):
            raise ValueError(f"unknown branch in {self.active_branches}")
        if not branches:
            raise ValueError("active_branches must be non-empty")
        object.__setattr__(self, "active_branches", branches)
        object.__setattr__(self, "fusion_hidden", tuple(self.fusion_hidden))
        for name in ("gin_hidden", "gin_layers", "branch_embed_dim",
                     "bottleneck_dim", "conv_channels", "conv_kernel", "conv_stride"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")
        if not 0.0 <= self.dropout < 1.0:
            raise ValueError("dropout must be in [0, 1)")

    def to_dict(self):
        return dataclasses.asdict(self)

    @classmethod
    def from_dict(cls, d):
        return cls(**{k: tuple(v) if isinstance(v, list) else v for k, v in d.items()})


def make_ablation_config(base, removed):
    """Copy of ``base`` with ``removed`` branches dropped from the active set."""
    removed = tuple(removed)
    unknown = set(removed) - set(BRANCHES)
    if unknown:
        raise ValueError(f"unknown branch(es) {sorted(unknown)}")
    remaining = tuple(b for b in base.active_branches if b not in set(removed))
    if not remaining:
        raise ValueError("cannot remove all branches")
    return dataclasses.replace(base, active_branches=remaining)


@dataclass(frozen=True)
class Prediction:
    drug_id: str
    protein_id: str
    y_true: float
    y_pred: float


class GraphBranch:
    """GIN stack + mean pool + linear/bottleneck head."""

    def __init__(self, name, node_dim, cfg, rng):
        self.name = name
        self.node_dim = node_dim
        dims = [node_dim] + [cfg.gin_hidden] * cfg.gin_layers
        self.blocks = [
            GINBlock(f"{name}.gin{k}", dims[k], dims[k + 1], rng)
            for k in range(cfg.gin_layers)
        ]
        self.pool = SegmentMeanPool()
        self.proj = Dense(f"{name}.proj", cfg.gin_hidden, cfg.branch_embed_dim, rng)
        self.proj_act = ReLU()
        self.bottleneck_in = Dense(
            f"{name}.bottleneck_in", cfg.branch_embed_dim, cfg.bottleneck_dim, rng
        )
        self.bottleneck_act = ReLU()
        self.bottleneck_out = Dense(
            f"{name}.bottleneck_out", cfg.bottleneck_dim, cfg.branch_embed_dim, rng
        )

    def _layers(self):
        return self.blocks + [self.proj, self.bottleneck_in, self.bottleneck_out]

    def params(self):
        return [p for layer in self._layers() for p in layer.params()]

    def grads(self):
        return [g for layer in self._layers() for g in layer.grads()]

    def state(self):
        return [s for layer in self._layers() for s in layer.state()]

    def forward(self, x, src, dst, seg, n_graphs, training=False):
        if x.shape[0] == 0:
            raise ValueError(f"{self.name}: empty graph batch")
        if x.shape[1] != self.node_dim:
            raise ValueError(
                f"{self.name}: node feature width {x.shape[1]} != {self.node_dim}"
            )
        h = x
        for block in self.blocks:
            h = block.forward(h, src, dst, training)
        pooled = self.pool.forward(h, seg, n_graphs)
        e = self.proj_act.forward(self.proj.forward(pooled))
        z = self.bottleneck_act.forward(self.bottleneck_in.forward(e))
        return self.bottleneck_out.forward(z)

    def backward(self, g):
        g = self.bottleneck_in.backward(
            self.bottleneck_act.backward(self.bottleneck_out.backward(g))
        )
        g = self.proj.backward(self.proj_act.backward(g))
        g = self.pool.backward(g)
        for block in reversed(self.blocks):
            g = block.backward(g)
        return g


class FingerprintBranch:
    """Strided 1D conv + ReLU + flatten + linear head."""

    def __init__(self, name, input_len, cfg, rng):
        self.name = name
        self.input_len = input_len
        self.conv = Conv1d(
            f"{name}.conv", cfg.conv_channels, cfg.conv_kernel, cfg.conv_stride, rng
        )
        self.act = ReLU()
        t_out = self.conv.out_length(input_len)
        self.fc = Dense(f"{name}.fc", t_out * cfg.conv_channels, cfg.branch_embed_dim, rng)

    def _layers(self):
        return [self.conv, self.fc]

    def params(self):
        return [p for layer in self._layers() for p in layer.params()]

    def grads(self):
        return [g for layer in self._layers() for g in layer.grads()]

    def state(self):
        return []

    def forward(self, x, training=False):
        if x.shape[1] != self.input_len:
            raise ValueError(
                f"{self.name}: input length {x.shape[1]} != {self.input_len}"
            )
        y = self.act.forward(self.conv.forward(x))
        self._shape = y.shape
        return self.fc.forward(y.reshape(y.shape[0], -1))

    def backward(self, g):
        g = self.fc.backward(g).reshape(self._shape)
        return self.conv.backward(self.act.backward(g))


class Model:
    """The assembled multi-branch regressor."""

    def __init__(self, config):
        self.config = config
        rng = np.random.default_rng(config.seed)
        self.branches = {}
        for branch in config.active_branches:
            if branch == "P_G":
                self.branches[branch] = GraphBranch("P_G", PROTEIN_NODE_DIM, config, rng)
            elif branch == "P_F":
                self.branches[branch] = FingerprintBranch("P_F", PROTEIN_FP_DIM, config, rng)
            elif branch == "D_G":
                self.branches[branch] = GraphBranch("D_G", DRUG_NODE_DIM, config, rng)
            else:
                self.branches[branch] = FingerprintBranch("D_F", DRUG_FP_DIM, config, rng)

        self.fusion_input_dim = len(config.active_branches) * config.branch_embed_dim
        self.fusion_layers = []
        width = self.fusion_input_dim
        for k, hidden in enumerate(config.fusion_hidden):
            self.fusion_layers.append(Dense(f"fusion.fc{k}", width, hidden, rng))
            self.fusion_layers.append(ReLU())
            self.fusion_layers.append(Dropout(config.dropout))
            width = hidden
        self.out_layer = Dense("fusion.out", width, 1, rng)

    # -- parameter plumbing ------------------------------------------------

    def _param_layers(self):
        layers = [self.branches[b] for b in self.config.active_branches]
        layers += [l for l in self.fusion_layers if isinstance(l, Dense)]
        layers.append(self.out_layer)
        return layers

    def named_params(self):
        return [p for layer in self._param_layers() for p in layer.params()]

    def named_grads(self):
        return [g for layer in self._param_layers() for g in layer.grads()]

    def named_state(self):
        out = []
        for branch in self.config.active_branches:
            out.extend(self.branches[branch].state())
        return out

    def parameter_count(self):
        return sum(p.size for _name, p in self.named_params())

    def set_output_bias(self, value):
        self.out_layer.b[:] = value

    # -- forward / backward -------------------------------------------------

    def _branch_forward(self, branch, batch, training):
        if branch == "P_G":
            emb = self.branches[branch].forward(
                batch.prot_node_x, batch.prot_src, batch.prot_dst,
                batch.prot_seg, batch.n_proteins, training,
            )
            return emb, batch.prot_index, batch.n_proteins
        if branch == "P_F":
            return (
                self.branches[branch].forward(batch.prot_fp, training),
                batch.prot_index,
                batch.n_proteins,
            )
        if branch == "D_G":
            emb = self.branches[branch].forward(
                batch.drug_node_x, batch.drug_src, batch.drug_dst,
                batch.drug_seg, batch.n_drugs, training,
            )
            return emb, batch.drug_index, batch.n_drugs
        return (
            self.branches[branch].forward(batch.drug_fp, training),
            batch.drug_index,
            batch.n_drugs,
        )

    def forward(self, batch, training=False, rng=None):
        parts = []
        self._gather = []
        for branch in self.config.active_branches:
            emb, index, n_unique = self._branch_forward(branch, batch, training)
            parts.append(emb[index])
            self._gather.append((branch, index, n_unique))
        h = np.concatenate(parts, axis=1)
        assert h.shape[1] == self.fusion_input_dim
        for layer in self.fusion_layers:
            if isinstance(layer, Dropout):
                h = layer.forward(h, training, rng)
            else:
                h = layer.forward(h, training)
        return self.out_layer.forward(h)[:, 0]

    def backward(self, gpred):
        g = self.out_layer.backward(gpred[:, None])
        for layer in reversed(self.fusion_layers):
            g = layer.backward(g)
        width = self.config.branch_embed_dim
        for k, (branch, index, n_unique) in enumerate(self._gather):
            gpart = np.ascontiguousarray(g[:, k * width : (k + 1) * width])
            gunique = kernels.segment_sum(gpart, index, n_unique)
            self.branches[branch].backward(gunique)

    def loss(self, batch, training=False, rng=None):
        pred = self.forward(batch, training=training, rng=rng)
        return float(np.mean((pred - batch.y) ** 2))

    def loss_and_grads(self, batch, training=True, rng=None):
        pred = self.forward(batch, training=training, rng=rng)
        resid = pred - batch.y
        loss = float(np.mean(resid**2))
        self.backward(2.0 * resid / resid.shape[0])
        return loss, self.named_grads()

    def predict(self, batch):
        return self.forward(batch, training=False)

    def make_optimizer(self, learning_rate):
        return Adam(self.named_params(), lr=learning_rate)


def init_model(config):
    """Deterministically initialized Model for a validated config."""
    return Model(config)


# -- checkpointing -----------------------------------------------------------


def save_checkpoint(model, path):
    """Atomic write of parameters, normalization state, config, and the
    featurization-version hash."""
    import os

    payload = {
        "__config__": np.frombuffer(
            json.dumps(model.config.to_dict()).encode(), dtype=np.uint8
        ),
        "__featurization__": np.frombuffer(
            FEATURIZATION_VERSION.encode(), dtype=np.uint8
        ),
    }
    for name, p in model.named_params():
        payload["p:" + name] = p
    for name, s in model.named_state():
        payload["s:" + name] = s
    tmp = str(path) + ".tmp"
    with open(tmp, "wb") as fh:
        np.savez(fh, **payload)
    os.replace(tmp, path)


def load_checkpoint(path):
    """Rebuild a Model from a checkpoint; refuses a mismatched featurization
    version (features on disk would not match what the model was trained on)."""
    with np.load(path) as data:
        version = bytes(data["__featurization__"]).decode()
        if version != FEATURIZATION_VERSION:
            raise ValueError(
                f"checkpoint featurization version {version} != current "
                f"{FEATURIZATION_VERSION}"
            )
        config = ModelConfig.from_dict(json.loads(bytes(data["__config__"]).decode()))
        model = Model(config)
        for name, p in model.named_params():
            stored = data["p:" + name]
            if stored.shape != p.shape:
                raise ValueError(f"checkpoint shape mismatch for {name}")
            p[...] = stored
        for name, s in model.named_state():
            s[...] = data["s:" + name]
    return model
