"""Drug-target affinity regression fusing protein 3D residue graphs, drug
molecular graphs, and classical fingerprints through a four-branch network."""

from .dataset import (
    AffinityExample,
    Dataset,
    DrugRecord,
    ProteinRecord,
    SplitSpec,
    export_curated_bundle,
    fetch_structure,
    filter_min_interactions,
    load_kiba,
    split_dataset,
)
from .drug_features import (
    MoleculeGraph,
    build_drug_graph,
    daylight_fingerprint,
    drug_fingerprint,
    morgan_fingerprint,
)
from .featurize import FEATURIZATION_VERSION, FeaturizedDataset, featurize_dataset
from .metrics import MetricsReport, compute_report, concordance_index, mse, pearson, rm2, spearman
from .model import (
    Model,
    ModelConfig,
    Prediction,
    init_model,
    load_checkpoint,
    make_ablation_config,
    save_checkpoint,
)
from .protein_features import (
    FeatureVector,
    aac_fingerprint,
    ctriad_fingerprint,
    protein_fingerprint,
    qsorder_fingerprint,
)
from .protein_graph import (
    Residue,
    ResidueGraph,
    build_protein_graph,
    parse_structure,
    residue_center_of_mass,
)
from .smiles import Molecule, SmilesError, parse_smiles
from .trainer import TrainConfig, TrainHistory, evaluate, train

__version__ = "0.1.0"
