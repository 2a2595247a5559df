"""Brain-network data model, dataset I/O, and the synthetic planted-circuit generator.

A network is a node-feature matrix (BOLD-like signals) plus a symmetric
nonnegative weighted adjacency (SC-like connection strengths) and a class
label. The synthetic generator plants correlated-signal, boosted-connectivity
circuits into diseased-class samples so that circuit detection has a ground
truth to be scored against.
"""

from __future__ import annotations

import hashlib
import json
import warnings
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

__all__ = [
    "BrainNetwork",
    "Dataset",
    "SyntheticSpec",
    "ValidationError",
    "FormatError",
    "generate_synthetic",
    "load_dataset",
    "save_dataset",
    "pearson_fc",
    "dataset_hash",
]

MANIFEST_NAME = "manifest.json"
GROUND_TRUTH_NAME = "ground_truth.json"
_FORMAT_VERSION = 1


class ValidationError(ValueError):
    """A network or dataset violates a structural invariant."""


class FormatError(ValueError):
    """On-disk data does not match the declared manifest."""


@dataclass(frozen=True)
class BrainNetwork:
    """One subject: features (n_nodes x f), adjacency (n_nodes x n_nodes), label.

    Invariants are enforced exactly at construction: the adjacency must be
    bit-symmetric, nonnegative, zero on the diagonal, and finite.
    """

    features: np.ndarray
    adjacency: np.ndarray
    label: int
    subject_id: str = ""

    def __post_init__(self):
        x = np.asarray(self.features, dtype=np.float64)
        a = np.asarray(self.adjacency, dtype=np.float64)
        object.__setattr__(self, "features", x)
        object.__setattr__(self, "adjacency", a)
        who = f" (subject '{self.subject_id}')" if self.subject_id else ""
        if x.ndim != 2:
            raise ValidationError(f"features must be 2-D{who}")
        if a.ndim != 2 or a.shape[0] != a.shape[1]:
            raise ValidationError(f"adjacency must be square{who}")
        if x.shape[0] != a.shape[0]:
            raise ValidationError(
                f"feature rows ({x.shape[0]}) != adjacency size ({a.shape[0]}){who}"
            )
        if not np.isfinite(x).all() or not np.isfinite(a).all():
            raise ValidationError(f"non-finite values{who}")
        if not np.array_equal(a, a.T):
            raise ValidationError(f"adjacency is not symmetric{who}")
        if np.any(a < 0.0):
            raise ValidationError(f"adjacency has negative weights{who}")
        if np.any(np.diag(a) != 0.0):
            raise ValidationError(f"adjacency diagonal must be zero{who}")
        if self.label < 0:
            raise ValidationError(f"label must be nonnegative{who}")
        x.setflags(write=False)
        a.setflags(write=False)

    @property
    def n_nodes(self) -> int:
        return self.adjacency.shape[0]

    @property
    def signal_length(self) -> int:
        return self.features.shape[1]


@dataclass(frozen=True)
class Dataset:
    """An ordered collection of networks sharing node count and signal length."""

    networks: tuple[BrainNetwork, ...]
    class_names: tuple[str, ...]
    provenance: str = "synthetic"  # "real" | "synthetic"

    def __post_init__(self):
        object.__setattr__(self, "networks", tuple(self.networks))
        object.__setattr__(self, "class_names", tuple(self.class_names))
        if self.provenance not in ("real", "synthetic"):
            raise ValidationError(f"provenance must be real|synthetic, got {self.provenance}")
        nets = self.networks
        if nets:
            n, f = nets[0].n_nodes, nets[0].signal_length
            for net in nets:
                if net.n_nodes != n or net.signal_length != f:
                    raise ValidationError(
                        f"subject '{net.subject_id}' shape ({net.n_nodes},{net.signal_length}) "
                        f"differs from dataset shape ({n},{f})"
                    )
        for net in nets:
            if net.label >= len(self.class_names):
                raise ValidationError(
                    f"subject '{net.subject_id}' label {net.label} outside class range"
                )

    def __len__(self) -> int:
        return len(self.networks)

    def __iter__(self):
        return iter(self.networks)

    def __getitem__(self, i: int) -> BrainNetwork:
        return self.networks[i]

    @property
    def n_nodes(self) -> int:
        return self.networks[0].n_nodes

    @property
    def signal_length(self) -> int:
        return self.networks[0].signal_length

    @property
    def n_classes(self) -> int:
        return len(self.class_names)

    def labels(self) -> np.ndarray:
        return np.array([net.label for net in self.networks], dtype=int)


@dataclass(frozen=True)
class SyntheticSpec:
    """Recipe for a planted-circuit dataset; generation is a pure function of it."""

    n_nodes: int = 20
    signal_length: int = 64
    n_samples_per_class: int = 100
    n_classes: int = 2
    planted_circuits: dict[int, tuple[tuple[int, ...], ...]] = field(default_factory=dict)
    sc_boost: float = 0.5
    bold_rho: float = 0.6
    noise_sigma: float = 1.0
    background_density: float = 0.3
    seed: int = 0
    class_names: tuple[str, ...] = ()

    def __post_init__(self):
        circuits = {
            int(c): tuple(tuple(int(v) for v in circ) for circ in circs)
            for c, circs in self.planted_circuits.items()
        }
        object.__setattr__(self, "planted_circuits", circuits)
        if self.n_nodes < 1 or self.signal_length < 2:
            raise ValidationError("need n_nodes >= 1 and signal_length >= 2")
        if self.n_samples_per_class < 1 or self.n_classes < 1:
            raise ValidationError("need at least one sample and one class")
        if self.sc_boost < 0.0:
            raise ValidationError("sc_boost must be nonnegative")
        if not (0.0 <= self.bold_rho < 1.0):
            raise ValidationError("bold_rho must lie in [0, 1)")
        if self.noise_sigma <= 0.0:
            raise ValidationError("noise_sigma must be positive")
        if not (0.0 < self.background_density <= 1.0):
            raise ValidationError("background_density must lie in (0, 1]")
        names = self.class_names or tuple(
            ["class_0"] + [f"class_{c}" for c in range(1, self.n_classes)]
        )
        if len(names) != self.n_classes:
            raise ValidationError("class_names length must equal n_classes")
        object.__setattr__(self, "class_names", tuple(names))
        for c, circs in circuits.items():
            if not (0 <= c < self.n_classes):
                raise ValidationError(f"planted circuit class {c} outside class range")
            seen: set[int] = set()
            for circ in circs:
                if not circ:
                    raise ValidationError(f"class {c} has an empty planted circuit")
                if any(v < 0 or v >= self.n_nodes for v in circ):
                    raise ValidationError(f"class {c} circuit node outside [0, {self.n_nodes})")
                if seen & set(circ):
                    raise ValidationError(f"class {c} planted circuits overlap")
                seen |= set(circ)
            if len(seen) > self.n_nodes:
                raise ValidationError("total circuit nodes exceed n_nodes")


def _background_adjacency(rng: np.random.Generator, n: int, density: float) -> np.ndarray:
    iu = np.triu_indices(n, k=1)
    weights = rng.random(len(iu[0]))
    mask = rng.random(len(iu[0])) < density
    a = np.zeros((n, n))
    a[iu] = weights * mask
    return a + a.T


def _sample_features(
    rng: np.random.Generator,
    spec: SyntheticSpec,
    circuits: tuple[tuple[int, ...], ...],
) -> np.ndarray:
    f = spec.signal_length
    x = rng.standard_normal((spec.n_nodes, f))
    rho = spec.bold_rho
    for circ in circuits:
        shared = rng.standard_normal(f)
        for v in circ:
            x[v] = np.sqrt(rho) * shared + np.sqrt(1.0 - rho) * x[v]
    return spec.noise_sigma * x


def generate_synthetic(spec: SyntheticSpec) -> tuple[Dataset, dict[int, list[list[int]]]]:
    """Generate a planted-circuit dataset plus its per-class ground-truth circuits.

    Healthy classes (no planted circuits) get background connectivity and
    i.i.d. signals; diseased classes get the same background with ``sc_boost``
    added on every intra-circuit pair and circuit signals sharing a latent
    factor that yields pairwise correlation ``bold_rho``.
    """
    rng = np.random.default_rng(spec.seed)
    networks: list[BrainNetwork] = []
    for c in range(spec.n_classes):
        circuits = spec.planted_circuits.get(c, ())
        for s in range(spec.n_samples_per_class):
            a = _background_adjacency(rng, spec.n_nodes, spec.background_density)
            for circ in circuits:
                idx = np.array(circ)
                block = np.ix_(idx, idx)
                a[block] += spec.sc_boost
                a[idx, idx] = 0.0
            x = _sample_features(rng, spec, circuits)
            networks.append(
                BrainNetwork(x, a, label=c, subject_id=f"{spec.class_names[c]}_{s:04d}")
            )
    dataset = Dataset(tuple(networks), spec.class_names, provenance="synthetic")
    truth = {c: [list(circ) for circ in spec.planted_circuits.get(c, ())] for c in range(spec.n_classes)}
    return dataset, truth


# ---------------------------------------------------------------------------
# directory serialization
# ---------------------------------------------------------------------------

def _write_matrix_csv(path: Path, mat: np.ndarray) -> None:
    lines = [",".join(repr(float(v)) for v in row) for row in mat]
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")


def _read_matrix_csv(path: Path) -> np.ndarray:
    try:
        mat = np.loadtxt(path, delimiter=",", dtype=np.float64, ndmin=2)
    except Exception as exc:
        raise FormatError(f"{path}: cannot parse matrix CSV ({exc})") from exc
    return mat


def save_dataset(
    dataset: Dataset,
    path,
    ground_truth: dict[int, list[list[int]]] | None = None,
    force: bool = False,
) -> None:
    """Write a dataset directory; a later ``load_dataset`` reproduces it bit-exactly.

    Refuses to write into an existing non-empty directory unless ``force``.
    """
    root = Path(path)
    if root.exists() and any(root.iterdir()) and not force:
        raise FileExistsError(f"{root}: directory exists and is not empty (use force)")
    try:
        root.mkdir(parents=True, exist_ok=True)
        subjects = []
        for i, net in enumerate(dataset):
            sid = net.subject_id or f"subject_{i:04d}"
            adjacency_file = f"{sid}_adjacency.csv"
            features_file = f"{sid}_features.csv"
            _write_matrix_csv(root / adjacency_file, net.adjacency)
            _write_matrix_csv(root / features_file, net.features)
            subjects.append(
                {
                    "id": sid,
                    "label": int(net.label),
                    "adjacency_file": adjacency_file,
                    "features_file": features_file,
                }
            )
        manifest = {
            "format_version": _FORMAT_VERSION,
            "n_nodes": dataset.n_nodes if len(dataset) else 0,
            "f": dataset.signal_length if len(dataset) else 0,
            "class_names": list(dataset.class_names),
            "provenance": dataset.provenance,
            "subjects": subjects,
        }
        (root / MANIFEST_NAME).write_text(
            json.dumps(manifest, indent=2) + "\n", encoding="utf-8"
        )
        if ground_truth is not None:
            payload = {str(c): circs for c, circs in sorted(ground_truth.items())}
            (root / GROUND_TRUTH_NAME).write_text(
                json.dumps(payload, indent=2) + "\n", encoding="utf-8"
            )
    except OSError as exc:
        raise OSError(f"failed writing dataset under {root}: {exc}") from exc


def load_dataset(path) -> Dataset:
    """Load a dataset directory; subject order follows the manifest."""
    root = Path(path)
    manifest_path = root / MANIFEST_NAME
    if not manifest_path.is_file():
        raise FormatError(f"{root}: missing {MANIFEST_NAME}")
    manifest = json.loads(manifest_path.read_text(encoding="utf-8"))
    if manifest.get("format_version") != _FORMAT_VERSION:
        raise FormatError(f"{root}: unsupported format_version {manifest.get('format_version')}")
    n_nodes = int(manifest["n_nodes"])
    f = int(manifest["f"])
    networks = []
    for entry in manifest["subjects"]:
        sid = entry["id"]
        adjacency = _read_matrix_csv(root / entry["adjacency_file"])
        features = _read_matrix_csv(root / entry["features_file"])
        if adjacency.shape != (n_nodes, n_nodes):
            raise FormatError(
                f"subject '{sid}': adjacency shape {adjacency.shape} != manifest ({n_nodes},{n_nodes})"
            )
        if features.shape != (n_nodes, f):
            raise FormatError(
                f"subject '{sid}': features shape {features.shape} != manifest ({n_nodes},{f})"
            )
        networks.append(
            BrainNetwork(features, adjacency, label=int(entry["label"]), subject_id=sid)
        )
    return Dataset(
        tuple(networks),
        tuple(manifest["class_names"]),
        provenance=manifest.get("provenance", "real"),
    )


def load_ground_truth(path) -> dict[int, list[list[int]]] | None:
    """Read planted-circuit ground truth if the dataset directory carries one."""
    gt_path = Path(path) / GROUND_TRUTH_NAME
    if not gt_path.is_file():
        return None
    raw = json.loads(gt_path.read_text(encoding="utf-8"))
    return {int(c): [[int(v) for v in circ] for circ in circs] for c, circs in raw.items()}


def dataset_hash(path) -> str:
    """SHA-256 over the manifest and every matrix file, in manifest order."""
    root = Path(path)
    digest = hashlib.sha256()
    manifest_path = root / MANIFEST_NAME
    digest.update(manifest_path.read_bytes())
    manifest = json.loads(manifest_path.read_text(encoding="utf-8"))
    for entry in manifest["subjects"]:
        digest.update((root / entry["adjacency_file"]).read_bytes())
        digest.update((root / entry["features_file"]).read_bytes())
    return digest.hexdigest()


# ---------------------------------------------------------------------------
# analysis utility
# ---------------------------------------------------------------------------

def pearson_fc(features: np.ndarray) -> np.ndarray:
    """Pearson correlation between node signal rows.

    Constant rows are flagged with a warning and get zero correlation to every
    other node; the diagonal is fixed at one.
    """
    x = np.asarray(features, dtype=np.float64)
    if x.ndim != 2 or x.shape[1] < 2:
        raise ValidationError("pearson_fc needs an n x f matrix with f >= 2")
    centered = x - x.mean(axis=1, keepdims=True)
    norms = np.sqrt((centered * centered).sum(axis=1))
    constant = norms == 0.0
    if constant.any():
        warnings.warn(
            f"pearson_fc: {int(constant.sum())} constant row(s), correlations set to 0",
            stacklevel=2,
        )
    safe = np.where(constant, 1.0, norms)
    corr = (centered @ centered.T) / np.outer(safe, safe)
    corr[constant, :] = 0.0
    corr[:, constant] = 0.0
    corr = np.clip(corr, -1.0, 1.0)
    corr = (corr + corr.T) / 2.0
    np.fill_diagonal(corr, 1.0)
    return corr
