"""Embedding models (TransE, DistMult, ComplEx): scoring, SGD training,
negative sampling, binary checkpoints and feature export.

All arithmetic is 64-bit. Training is plain SGD over mini-batches with
analytic gradients (no autograd), which keeps runs bitwise reproducible
under a fixed seed and makes finite-difference gradient checks tight.
TransE uses margin ranking loss with entity vectors projected onto the
unit ball after each epoch; DistMult and ComplEx use logistic loss with a
per-atom L2 penalty on the vectors involved.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from .errors import DataError, NumericError
from .kg import KnowledgeGraph, Triple

MODEL_KINDS = ("transe", "distmult", "complex")
_KIND_CODE = {k: i for i, k in enumerate(MODEL_KINDS)}
CKPT_MAGIC = b"KGE1"

DIM_GRID = (10, 20, 30, 50, 80, 100)
EPOCH_GRID = (20, 40, 60, 80, 100)


@dataclass
class TrainConfig:
    model: str = "transe"
    dim: int = 100
    epochs: int = 100
    checkpoint_every: int = 20
    batch_size: int = 512
    learning_rate: float = 0.01
    negatives_per_positive: int = 1
    margin: float = 1.0  # TransE only
    regularization: float = 1e-4  # DistMult/ComplEx only
    seed: int = 0
    threads: int = 1

    def __post_init__(self) -> None:
        if self.model not in MODEL_KINDS:
            raise DataError(f"unknown model kind: {self.model!r} (expected one of {MODEL_KINDS})")
        if self.dim < 1:
            raise DataError("dim must be positive")
        if self.epochs < 0:
            raise DataError("epochs must be >= 0")
        if self.epochs and self.checkpoint_every and self.epochs % self.checkpoint_every != 0:
            raise DataError(
                f"checkpoint_every={self.checkpoint_every} must divide epochs={self.epochs}"
            )
        if self.negatives_per_positive < 1:
            raise DataError("negatives_per_positive must be >= 1")


class EmbeddingModel:
    """Per-entity and per-relation vectors plus the scoring function.

    ComplEx keeps separate real and imaginary matrices; the other models
    leave the imaginary parts as None.
    """

    def __init__(
        self,
        kind: str,
        entity_re: np.ndarray,
        relation_re: np.ndarray,
        entity_im: np.ndarray | None = None,
        relation_im: np.ndarray | None = None,
        seed: int = 0,
        epoch: int = 0,
    ) -> None:
        if kind not in MODEL_KINDS:
            raise DataError(f"unknown model kind: {kind!r}")
        if kind == "complex" and (entity_im is None or relation_im is None):
            raise DataError("complex model requires imaginary matrices")
        self.kind = kind
        self.entity_re = entity_re
        self.relation_re = relation_re
        self.entity_im = entity_im
        self.relation_im = relation_im
        self.seed = seed
        self.epoch = epoch

    @classmethod
    def initialize(
        cls, kind: str, n_entities: int, n_relations: int, dim: int, seed: int
    ) -> "EmbeddingModel":
        """Entries i.i.d. uniform in [-6/sqrt(dim), +6/sqrt(dim)]."""
        rng = np.random.default_rng(seed)
        bound = 6.0 / np.sqrt(dim)

        def mat(rows: int) -> np.ndarray:
            return rng.uniform(-bound, bound, size=(rows, dim))

        e_im = r_im = None
        e_re = mat(n_entities)
        r_re = mat(n_relations)
        if kind == "complex":
            e_im = mat(n_entities)
            r_im = mat(n_relations)
        return cls(kind, e_re, r_re, e_im, r_im, seed=seed, epoch=0)

    @property
    def dim(self) -> int:
        return self.entity_re.shape[1]

    @property
    def n_entities(self) -> int:
        return self.entity_re.shape[0]

    @property
    def n_relations(self) -> int:
        return self.relation_re.shape[0]

    def _check(self, t: Triple) -> None:
        if not (0 <= t.head < self.n_entities and 0 <= t.tail < self.n_entities):
            raise DataError(f"entity index out of range in {t}")
        if not 0 <= t.relation < self.n_relations:
            raise DataError(f"relation index out of range in {t}")

    # -- scoring ----------------------------------------------------------

    def score(self, relation: int, head: int, tail: int) -> float:
        t = Triple(head, relation, tail)
        self._check(t)
        if self.kind == "transe":
            return score_transe(self, t)
        if self.kind == "distmult":
            return score_distmult(self, t)
        return score_complex(self, t)

    def score_tails(self, relation: int, head: int) -> np.ndarray:
        """Scores of (head, relation, e) for every entity e."""
        self._check(Triple(head, relation, head))
        if self.kind == "transe":
            delta = self.entity_re[head] + self.relation_re[relation] - self.entity_re
            return -np.sqrt((delta * delta).sum(axis=1))
        if self.kind == "distmult":
            return (self.entity_re[head] * self.entity_re) @ self.relation_re[relation]
        hr, hi = self.entity_re[head], self.entity_im[head]
        rr, ri = self.relation_re[relation], self.relation_im[relation]
        tr, ti = self.entity_re, self.entity_im
        return ((hr * tr) @ rr + (hi * ti) @ rr + (hr * ti) @ ri - (hi * tr) @ ri)

    def score_heads(self, relation: int, tail: int) -> np.ndarray:
        """Scores of (e, relation, tail) for every entity e."""
        self._check(Triple(tail, relation, tail))
        if self.kind == "transe":
            delta = self.entity_re + self.relation_re[relation] - self.entity_re[tail]
            return -np.sqrt((delta * delta).sum(axis=1))
        if self.kind == "distmult":
            return (self.entity_re * self.entity_re[tail]) @ self.relation_re[relation]
        tr_, ti_ = self.entity_re[tail], self.entity_im[tail]
        rr, ri = self.relation_re[relation], self.relation_im[relation]
        hr, hi = self.entity_re, self.entity_im
        return ((hr * tr_) @ rr + (hi * ti_) @ rr + (hr * ti_) @ ri - (hi * tr_) @ ri)

    # -- features ----------------------------------------------------------

    def feature_matrix(self, entities: Sequence[int]) -> np.ndarray:
        """Row per entity; ComplEx concatenates real and imaginary parts."""
        ids = np.asarray(list(entities), dtype=np.int64)
        if ids.size and (ids.min() < 0 or ids.max() >= self.n_entities):
            raise DataError("unknown entity in feature export")
        if self.kind == "complex":
            return np.concatenate([self.entity_re[ids], self.entity_im[ids]], axis=1)
        return self.entity_re[ids].copy()

    # -- persistence --------------------------------------------------------

    def save(self, path: Path) -> None:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        with path.open("wb") as fh:
            fh.write(CKPT_MAGIC)
            fh.write(
                struct.pack(
                    "<BIIQII",
                    _KIND_CODE[self.kind],
                    self.dim,
                    self.epoch,
                    self.seed & 0xFFFFFFFFFFFFFFFF,
                    self.n_entities,
                    self.n_relations,
                )
            )
            fh.write(self.entity_re.astype("<f8").tobytes())
            if self.kind == "complex":
                fh.write(self.entity_im.astype("<f8").tobytes())
            fh.write(self.relation_re.astype("<f8").tobytes())
            if self.kind == "complex":
                fh.write(self.relation_im.astype("<f8").tobytes())

    @classmethod
    def load(cls, path: Path) -> "EmbeddingModel":
        path = Path(path)
        data = path.read_bytes()
        if data[:4] != CKPT_MAGIC:
            raise DataError(f"{path}: bad magic, not a checkpoint file")
        kind_code, dim, epoch, seed, n_ent, n_rel = struct.unpack_from("<BIIQII", data, 4)
        if kind_code >= len(MODEL_KINDS):
            raise DataError(f"{path}: unknown model kind code {kind_code}")
        kind = MODEL_KINDS[kind_code]
        off = 4 + struct.calcsize("<BIIQII")

        def take(rows: int) -> np.ndarray:
            nonlocal off
            size = rows * dim * 8
            if off + size > len(data):
                raise DataError(f"{path}: truncated checkpoint")
            arr = np.frombuffer(data, dtype="<f8", count=rows * dim, offset=off).reshape(rows, dim)
            off += size
            return arr.astype(np.float64)

        e_re = take(n_ent)
        e_im = take(n_ent) if kind == "complex" else None
        r_re = take(n_rel)
        r_im = take(n_rel) if kind == "complex" else None
        if off != len(data):
            raise DataError(f"{path}: trailing bytes in checkpoint")
        return cls(kind, e_re, r_re, e_im, r_im, seed=seed, epoch=epoch)


# -- scoring functions ---------------------------------------------------------


def score_transe(m: EmbeddingModel, t: Triple) -> float:
    """-||e_h + e_r - e_t||_2 ; zero exactly when the translation is exact."""
    m._check(t)
    d = m.entity_re[t.head] + m.relation_re[t.relation] - m.entity_re[t.tail]
    return float(-np.sqrt(np.dot(d, d)))


def score_distmult(m: EmbeddingModel, t: Triple) -> float:
    """Sum_i e_h[i] * e_r[i] * e_t[i], grouped (h*t)*r so the score is
    bitwise symmetric under head/tail swap."""
    m._check(t)
    return float(((m.entity_re[t.head] * m.entity_re[t.tail]) * m.relation_re[t.relation]).sum())


def score_complex(m: EmbeddingModel, t: Triple) -> float:
    """Real part of sum_i e_r[i] * e_h[i] * conj(e_t[i]).

    Expanded into the four real trilinear terms; with zero imaginary parts
    the first term is computed exactly like the DistMult score.
    """
    m._check(t)
    hr, hi = m.entity_re[t.head], m.entity_im[t.head]
    rr, ri = m.relation_re[t.relation], m.relation_im[t.relation]
    tr, ti = m.entity_re[t.tail], m.entity_im[t.tail]
    return float(
        ((hr * tr) * rr).sum()
        + ((hi * ti) * rr).sum()
        + ((hr * ti) * ri).sum()
        - ((hi * tr) * ri).sum()
    )


# -- negative sampling -----------------------------------------------------------


@dataclass
class SamplerStats:
    forced_accepts: int = 0


def sample_negatives(
    kg: KnowledgeGraph,
    t: Triple,
    k: int,
    rng: np.random.Generator,
    stats: SamplerStats | None = None,
    max_retries: int = 100,
) -> list[Triple]:
    """k corrupted triples, replacing head or tail (fair coin) with a
    uniform entity; candidates found in known_true are rejected and
    resampled. After `max_retries` rejections a known-true candidate is
    accepted anyway and the stats counter is incremented."""
    if k < 1:
        raise DataError("negative sample count must be >= 1")
    n = kg.n_entities
    out: list[Triple] = []
    for _ in range(k):
        cand = t
        accepted = False
        for _attempt in range(max_retries):
            corrupt_head = rng.random() < 0.5
            e = int(rng.integers(0, n))
            cand = Triple(e, t.relation, t.tail) if corrupt_head else Triple(t.head, t.relation, e)
            if cand not in kg.known_true:
                accepted = True
                break
        if not accepted and stats is not None:
            stats.forced_accepts += 1
        out.append(cand)
    return out


# -- losses and gradients ----------------------------------------------------------


def _softplus(x: np.ndarray) -> np.ndarray:
    # log(1 + exp(x)) without overflow
    return np.where(x > 0, x + np.log1p(np.exp(-np.abs(x))), np.log1p(np.exp(x)))


def _sigmoid(x: np.ndarray) -> np.ndarray:
    out = np.empty_like(x)
    pos = x >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-x[pos]))
    ex = np.exp(x[~pos])
    out[~pos] = ex / (1.0 + ex)
    return out


def batch_loss(
    model: EmbeddingModel,
    positives: np.ndarray,
    negatives: np.ndarray,
    cfg: TrainConfig,
) -> float:
    """Training loss of one mini-batch.

    positives: (B, 3) int array of (h, r, t); negatives: (B, K, 3) with K
    corruptions per positive. TransE: mean over the B*K (pos, neg) pairs of
    max(0, margin - psi(pos) + psi(neg)). DistMult/ComplEx: mean over the
    B*(1+K) atoms of log(1 + exp(-y * psi)) + reg * (squared norms of the
    atom's vectors), y = +1 for positives and -1 for corruptions.
    """
    loss, _ = _loss_and_grads(model, positives, negatives, cfg, want_grads=False)
    return loss


def batch_gradients(
    model: EmbeddingModel,
    positives: np.ndarray,
    negatives: np.ndarray,
    cfg: TrainConfig,
) -> tuple[float, dict[str, np.ndarray]]:
    """Loss and dense analytic gradients w.r.t. every parameter matrix."""
    return _loss_and_grads(model, positives, negatives, cfg, want_grads=True)


def _flat_atoms(positives: np.ndarray, negatives: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """(atoms, labels): positives get +1, each corruption -1."""
    b, k = negatives.shape[0], negatives.shape[1]
    atoms = np.concatenate([positives, negatives.reshape(b * k, 3)], axis=0)
    labels = np.concatenate([np.ones(b), -np.ones(b * k)])
    return atoms, labels


def _loss_and_grads(
    model: EmbeddingModel,
    positives: np.ndarray,
    negatives: np.ndarray,
    cfg: TrainConfig,
    want_grads: bool,
) -> tuple[float, dict[str, np.ndarray]]:
    grads: dict[str, np.ndarray] = {}
    if want_grads:
        grads["entity_re"] = np.zeros_like(model.entity_re)
        grads["relation_re"] = np.zeros_like(model.relation_re)
        if model.kind == "complex":
            grads["entity_im"] = np.zeros_like(model.entity_im)
            grads["relation_im"] = np.zeros_like(model.relation_im)

    if model.kind == "transe":
        b, k = negatives.shape[0], negatives.shape[1]
        pos_rep = np.repeat(positives, k, axis=0)
        neg = negatives.reshape(b * k, 3)
        n_pairs = len(pos_rep)
        E, R = model.entity_re, model.relation_re
        dp = E[pos_rep[:, 0]] + R[pos_rep[:, 1]] - E[pos_rep[:, 2]]
        dn = E[neg[:, 0]] + R[neg[:, 1]] - E[neg[:, 2]]
        np_norm = np.sqrt((dp * dp).sum(axis=1))
        nn_norm = np.sqrt((dn * dn).sum(axis=1))
        margins = cfg.margin + np_norm - nn_norm  # = margin - psi(pos) + psi(neg)
        active = margins > 0
        loss = float(np.where(active, margins, 0.0).sum() / n_pairs)
        if want_grads and active.any():
            # d||d||/dd = d/||d||; guard zero norms (subgradient 0 there)
            up = np.zeros_like(dp)
            un = np.zeros_like(dn)
            nz = np_norm > 0
            up[nz & active] = dp[nz & active] / np_norm[nz & active, None]
            nz = nn_norm > 0
            un[nz & active] = dn[nz & active] / nn_norm[nz & active, None]
            scale = 1.0 / n_pairs
            ge, gr = grads["entity_re"], grads["relation_re"]
            np.add.at(ge, pos_rep[:, 0], scale * up)
            np.add.at(gr, pos_rep[:, 1], scale * up)
            np.add.at(ge, pos_rep[:, 2], -scale * up)
            np.add.at(ge, neg[:, 0], -scale * un)
            np.add.at(gr, neg[:, 1], -scale * un)
            np.add.at(ge, neg[:, 2], scale * un)
        return loss, grads

    atoms, labels = _flat_atoms(positives, negatives)
    n_atoms = len(atoms)
    h, r, t = atoms[:, 0], atoms[:, 1], atoms[:, 2]
    lam = cfg.regularization
    if model.kind == "distmult":
        E, R = model.entity_re, model.relation_re
        eh, er, et = E[h], R[r], E[t]
        psi = ((eh * et) * er).sum(axis=1)
        z = -labels * psi
        reg = lam * ((eh * eh).sum(axis=1) + (er * er).sum(axis=1) + (et * et).sum(axis=1))
        loss = float((_softplus(z) + reg).sum() / n_atoms)
        if want_grads:
            gpsi = (-labels * _sigmoid(z)) / n_atoms
            ge, gr = grads["entity_re"], grads["relation_re"]
            np.add.at(ge, h, gpsi[:, None] * (er * et) + (2 * lam / n_atoms) * eh)
            np.add.at(gr, r, gpsi[:, None] * (eh * et) + (2 * lam / n_atoms) * er)
            np.add.at(ge, t, gpsi[:, None] * (eh * er) + (2 * lam / n_atoms) * et)
        return loss, grads

    # complex
    Er, Ei, Rr, Ri = model.entity_re, model.entity_im, model.relation_re, model.relation_im
    hr, hi = Er[h], Ei[h]
    rr, ri = Rr[r], Ri[r]
    tr, ti = Er[t], Ei[t]
    psi = (
        ((hr * tr) * rr).sum(axis=1)
        + ((hi * ti) * rr).sum(axis=1)
        + ((hr * ti) * ri).sum(axis=1)
        - ((hi * tr) * ri).sum(axis=1)
    )
    z = -labels * psi
    sq = lambda a: (a * a).sum(axis=1)  # noqa: E731
    reg = lam * (sq(hr) + sq(hi) + sq(rr) + sq(ri) + sq(tr) + sq(ti))
    loss = float((_softplus(z) + reg).sum() / n_atoms)
    if want_grads:
        gpsi = ((-labels * _sigmoid(z)) / n_atoms)[:, None]
        reg2 = 2 * lam / n_atoms
        np.add.at(grads["entity_re"], h, gpsi * (rr * tr + ri * ti) + reg2 * hr)
        np.add.at(grads["entity_im"], h, gpsi * (rr * ti - ri * tr) + reg2 * hi)
        np.add.at(grads["relation_re"], r, gpsi * (hr * tr + hi * ti) + reg2 * rr)
        np.add.at(grads["relation_im"], r, gpsi * (hr * ti - hi * tr) + reg2 * ri)
        np.add.at(grads["entity_re"], t, gpsi * (rr * hr - ri * hi) + reg2 * tr)
        np.add.at(grads["entity_im"], t, gpsi * (rr * hi + ri * hr) + reg2 * ti)
    return loss, grads


# -- training ---------------------------------------------------------------------


@dataclass
class TrainResult:
    model: EmbeddingModel
    epoch_losses: list[float] = field(default_factory=list)
    forced_negative_accepts: int = 0
    checkpoints: list[Path] = field(default_factory=list)


def _project_unit_ball(E: np.ndarray) -> None:
    norms = np.sqrt((E * E).sum(axis=1))
    over = norms > 1.0
    if over.any():
        E[over] /= norms[over, None]


def checkpoint_path(directory: Path, cfg: TrainConfig, epoch: int) -> Path:
    return Path(directory) / f"{cfg.model}_d{cfg.dim}_s{cfg.seed}_e{epoch}.kge"


def train(
    kg: KnowledgeGraph,
    cfg: TrainConfig,
    checkpoint_dir: Path | None = None,
) -> TrainResult:
    """SGD training on the train split; classification labels never enter.

    Checkpoints are written every `checkpoint_every` epochs when a
    directory is given. With epochs=0 the freshly initialized model is
    returned unchanged. Raises NumericError naming epoch and batch if the
    loss goes non-finite.
    """
    triples = kg.triples("train")
    if not triples and cfg.epochs > 0:
        raise DataError("train split is empty")
    model = EmbeddingModel.initialize(cfg.model, kg.n_entities, kg.n_relations, cfg.dim, cfg.seed)
    result = TrainResult(model=model)
    rng = np.random.default_rng(cfg.seed)
    stats = SamplerStats()
    arr = np.asarray(triples, dtype=np.int64)

    if cfg.threads > 1:
        _train_epochs_hogwild(kg, cfg, model, arr, rng, stats, result, checkpoint_dir)
        return result

    for epoch in range(1, cfg.epochs + 1):
        order = rng.permutation(len(arr))
        epoch_loss = 0.0
        n_batches = 0
        for bi, start in enumerate(range(0, len(arr), cfg.batch_size)):
            batch = arr[order[start : start + cfg.batch_size]]
            negs = _sample_negative_block(kg, batch, cfg.negatives_per_positive, rng, stats)
            loss, grads = batch_gradients(model, batch, negs, cfg)
            if not np.isfinite(loss):
                raise NumericError(f"non-finite loss at epoch {epoch}, batch {bi}")
            _apply_sgd(model, grads, cfg.learning_rate)
            epoch_loss += loss
            n_batches += 1
        if cfg.model == "transe":
            _project_unit_ball(model.entity_re)
        _check_finite_params(model, epoch)
        model.epoch = epoch
        result.epoch_losses.append(epoch_loss / max(n_batches, 1))
        if checkpoint_dir is not None and cfg.checkpoint_every and epoch % cfg.checkpoint_every == 0:
            path = checkpoint_path(checkpoint_dir, cfg, epoch)
            model.save(path)
            result.checkpoints.append(path)
    result.forced_negative_accepts = stats.forced_accepts
    return result


def _check_finite_params(model: EmbeddingModel, epoch: int) -> None:
    for name in ("entity_re", "relation_re", "entity_im", "relation_im"):
        arr = getattr(model, name)
        if arr is not None and not np.isfinite(arr).all():
            raise NumericError(f"non-finite {name} entries after epoch {epoch}")


def _sample_negative_block(
    kg: KnowledgeGraph,
    batch: np.ndarray,
    k: int,
    rng: np.random.Generator,
    stats: SamplerStats,
) -> np.ndarray:
    negs = np.empty((len(batch), k, 3), dtype=np.int64)
    for i, row in enumerate(batch):
        t = Triple(int(row[0]), int(row[1]), int(row[2]))
        for j, neg in enumerate(sample_negatives(kg, t, k, rng, stats)):
            negs[i, j] = neg
    return negs


def _apply_sgd(model: EmbeddingModel, grads: dict[str, np.ndarray], lr: float) -> None:
    model.entity_re -= lr * grads["entity_re"]
    model.relation_re -= lr * grads["relation_re"]
    if model.kind == "complex":
        model.entity_im -= lr * grads["entity_im"]
        model.relation_im -= lr * grads["relation_im"]


def _train_epochs_hogwild(
    kg: KnowledgeGraph,
    cfg: TrainConfig,
    model: EmbeddingModel,
    arr: np.ndarray,
    rng: np.random.Generator,
    stats: SamplerStats,
    result: TrainResult,
    checkpoint_dir: Path | None,
) -> None:
    """Opt-in parallel mode: mini-batches sharded across threads with
    unsynchronized parameter updates. Determinism is waived here."""
    from concurrent.futures import ThreadPoolExecutor

    def step(batch: np.ndarray, seed: int) -> float:
        local_rng = np.random.default_rng(seed)
        negs = _sample_negative_block(kg, batch, cfg.negatives_per_positive, local_rng, stats)
        loss, grads = batch_gradients(model, batch, negs, cfg)
        _apply_sgd(model, grads, cfg.learning_rate)
        return loss

    with ThreadPoolExecutor(max_workers=cfg.threads) as pool:
        for epoch in range(1, cfg.epochs + 1):
            order = rng.permutation(len(arr))
            batches = [
                arr[order[s : s + cfg.batch_size]] for s in range(0, len(arr), cfg.batch_size)
            ]
            seeds = [int(rng.integers(0, 2**63)) for _ in batches]
            losses = list(pool.map(step, batches, seeds))
            if not all(np.isfinite(losses)):
                bad = int(np.argmin(np.isfinite(losses)))
                raise NumericError(f"non-finite loss at epoch {epoch}, batch {bad}")
            if cfg.model == "transe":
                _project_unit_ball(model.entity_re)
            _check_finite_params(model, epoch)
            model.epoch = epoch
            result.epoch_losses.append(float(np.mean(losses)) if losses else 0.0)
            if checkpoint_dir is not None and cfg.checkpoint_every and epoch % cfg.checkpoint_every == 0:
                path = checkpoint_path(checkpoint_dir, cfg, epoch)
                model.save(path)
                result.checkpoints.append(path)
    result.forced_negative_accepts = stats.forced_accepts


# -- feature export ------------------------------------------------------------------


def export_features(m: EmbeddingModel, entities: Sequence[int]) -> np.ndarray:
    """Feature matrix: dim columns, or 2*dim for ComplEx (real ++ imaginary)."""
    return m.feature_matrix(entities)


def write_features_csv(m: EmbeddingModel, entities: Sequence[int], labels: Sequence[str], path: Path) -> None:
    feats = m.feature_matrix(entities)
    width = feats.shape[1]
    with Path(path).open("w", encoding="utf-8", newline="\n") as fh:
        fh.write("entity," + ",".join(f"f{i}" for i in range(width)) + "\n")
        for lab, row in zip(labels, feats):
            fh.write(lab + "," + ",".join(repr(float(x)) for x in row) + "\n")
