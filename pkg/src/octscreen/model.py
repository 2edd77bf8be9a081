"""Transformer classifier with an adjustable class embedding.

The encoder is a standard pre-norm ViT over anisotropic patch tokens. Two
class tokens ride along: a benchmark token (equal blend of the two learned
vectors) and an adjusted token whose blend follows the requested criterion
shift. Neither carries a positional embedding, so they are distinguished
only by their contents. One shared linear head reads both tokens out, which
forces all delta-dependence through the class embedding.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from . import autodiff as ad
from .autodiff import Tensor
from .labels import check_delta
from .patches import PatchGeometry, extract_patches_batch, square_geometry, toy_geometry


@dataclass(frozen=True)
class ModelConfig:
    geometry: PatchGeometry = field(default_factory=toy_geometry)
    embed_dim: int = 32
    depth: int = 2
    heads: int = 2
    mlp_ratio: int = 2
    use_ape: bool = True
    use_ace: bool = True
    use_sst: bool = True

    def __post_init__(self):
        if self.embed_dim % self.heads != 0:
            raise ValueError(
                f"embed_dim {self.embed_dim} not divisible by heads {self.heads}"
            )

    @property
    def effective_geometry(self) -> PatchGeometry:
        """The tiling actually used; square fallback when APE is ablated."""
        if self.use_ape:
            return self.geometry
        return square_geometry(self.geometry.image_h, self.geometry.image_w)

    def to_dict(self) -> dict:
        g = self.geometry
        return {
            "geometry": [g.image_h, g.image_w, g.patch_h, g.patch_w, g.stride_h, g.stride_w],
            "embed_dim": self.embed_dim,
            "depth": self.depth,
            "heads": self.heads,
            "mlp_ratio": self.mlp_ratio,
            "use_ape": self.use_ape,
            "use_ace": self.use_ace,
            "use_sst": self.use_sst,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "ModelConfig":
        return cls(
            geometry=PatchGeometry(*d["geometry"]),
            embed_dim=d["embed_dim"],
            depth=d["depth"],
            heads=d["heads"],
            mlp_ratio=d["mlp_ratio"],
            use_ape=d["use_ape"],
            use_ace=d["use_ace"],
            use_sst=d["use_sst"],
        )


def parameter_names(config: ModelConfig) -> list[str]:
    """Canonical parameter order shared by init, checkpoints, and gradcheck."""
    names = ["patch_proj.w", "patch_proj.b", "pos_embed"]
    if config.use_ace:
        names += ["ace.v1", "ace.v2"]
    else:
        names += ["ace.fixed"]
    for i in range(config.depth):
        p = f"block{i}."
        names += [
            p + "ln1.gamma", p + "ln1.beta",
            p + "attn.w_qkv", p + "attn.b_qkv",
            p + "attn.w_out", p + "attn.b_out",
            p + "ln2.gamma", p + "ln2.beta",
            p + "mlp.w1", p + "mlp.b1",
            p + "mlp.w2", p + "mlp.b2",
        ]
    names += ["final_ln.gamma", "final_ln.beta", "head.w", "head.b"]
    return names


def parameter_shapes(config: ModelConfig) -> dict[str, tuple[int, ...]]:
    g = config.effective_geometry
    d = config.embed_dim
    hidden = d * config.mlp_ratio
    shapes: dict[str, tuple[int, ...]] = {
        "patch_proj.w": (g.patch_dim, d),
        "patch_proj.b": (d,),
        "pos_embed": (g.token_count, d),
        "ace.v1": (d,),
        "ace.v2": (d,),
        "ace.fixed": (d,),
        "final_ln.gamma": (d,),
        "final_ln.beta": (d,),
        "head.w": (d, 2),
        "head.b": (2,),
    }
    for i in range(config.depth):
        p = f"block{i}."
        shapes[p + "ln1.gamma"] = (d,)
        shapes[p + "ln1.beta"] = (d,)
        shapes[p + "attn.w_qkv"] = (d, 3 * d)
        shapes[p + "attn.b_qkv"] = (3 * d,)
        shapes[p + "attn.w_out"] = (d, d)
        shapes[p + "attn.b_out"] = (d,)
        shapes[p + "ln2.gamma"] = (d,)
        shapes[p + "ln2.beta"] = (d,)
        shapes[p + "mlp.w1"] = (d, hidden)
        shapes[p + "mlp.b1"] = (hidden,)
        shapes[p + "mlp.w2"] = (hidden, d)
        shapes[p + "mlp.b2"] = (d,)
    return {name: shapes[name] for name in parameter_names(config)}


INIT_STD = 0.02


def init_params(config: ModelConfig, seed: int, dtype=np.float32) -> dict[str, Tensor]:
    """Normal(0, 0.02) weights and embeddings, zero biases, unit LN gains."""
    rng = np.random.default_rng(seed)
    params: dict[str, Tensor] = {}
    for name, shape in parameter_shapes(config).items():
        leaf = name.rsplit(".", 1)[-1]
        if leaf in ("gamma",):
            data = np.ones(shape)
        elif leaf in ("beta", "b", "b_qkv", "b_out", "b1", "b2"):
            data = np.zeros(shape)
        else:
            data = rng.normal(0.0, INIT_STD, size=shape)
        params[name] = Tensor(data.astype(dtype), requires_grad=True)
    return params


def ace_embedding(delta: float, v1: Tensor, v2: Tensor) -> Tensor:
    """Blend of the two class vectors: (1+d)/2 * v1 + (1-d)/2 * v2."""
    delta = check_delta(delta)
    return ad.add(ad.mul(v1, (1.0 + delta) / 2.0), ad.mul(v2, (1.0 - delta) / 2.0))


class ScreeningModel:
    """Config plus named parameters; forward passes build autodiff graphs."""

    def __init__(self, config: ModelConfig, params: dict[str, Tensor]):
        expected = parameter_shapes(config)
        missing = [n for n in expected if n not in params]
        extra = [n for n in params if n not in expected]
        if missing or extra:
            raise ValueError(f"parameter set mismatch: missing={missing} extra={extra}")
        self.config = config
        self.params = params

    @classmethod
    def init(cls, config: ModelConfig, seed: int = 0, dtype=np.float32) -> "ScreeningModel":
        return cls(config, init_params(config, seed, dtype=dtype))

    @property
    def dtype(self):
        return self.params["head.w"].dtype

    def astype(self, dtype) -> "ScreeningModel":
        cast = {
            n: Tensor(t.data.astype(dtype), requires_grad=True) for n, t in self.params.items()
        }
        return ScreeningModel(self.config, cast)

    def _affine_ln(self, x: Tensor, prefix: str) -> Tensor:
        h = ad.layer_norm(x, axis=-1)
        return ad.add(ad.mul(h, self.params[prefix + ".gamma"]), self.params[prefix + ".beta"])

    def _block(self, x: Tensor, i: int) -> Tensor:
        p = self.params
        cfg = self.config
        b, t, d = x.shape
        heads = cfg.heads
        dh = d // heads
        h = self._affine_ln(x, f"block{i}.ln1")
        qkv = ad.add(ad.matmul(h, p[f"block{i}.attn.w_qkv"]), p[f"block{i}.attn.b_qkv"])

        def split_heads(lo: int) -> Tensor:
            part = qkv[:, :, lo : lo + d]
            return ad.transpose(ad.reshape(part, (b, t, heads, dh)), (0, 2, 1, 3))

        q, k, v = split_heads(0), split_heads(d), split_heads(2 * d)
        scores = ad.mul(ad.matmul(q, ad.transpose(k, (0, 1, 3, 2))), dh ** -0.5)
        attn = ad.softmax(scores, axis=-1)
        mixed = ad.reshape(ad.transpose(ad.matmul(attn, v), (0, 2, 1, 3)), (b, t, d))
        x = ad.add(x, ad.add(ad.matmul(mixed, p[f"block{i}.attn.w_out"]), p[f"block{i}.attn.b_out"]))
        h2 = self._affine_ln(x, f"block{i}.ln2")
        inner = ad.gelu(ad.add(ad.matmul(h2, p[f"block{i}.mlp.w1"]), p[f"block{i}.mlp.b1"]))
        x = ad.add(x, ad.add(ad.matmul(inner, p[f"block{i}.mlp.w2"]), p[f"block{i}.mlp.b2"]))
        return x

    def forward_from_patches(self, patches, deltas) -> tuple[Tensor, Tensor]:
        """Posterior pair from pre-extracted patch tokens.

        patches: (batch, token_count, patch_dim) array or Tensor.
        deltas: scalar or (batch,) of per-sample adjustment coefficients.
        Returns (benchmark, adjusted) posteriors, each (batch, 2).
        """
        p = self.params
        if not isinstance(patches, Tensor):
            patches = Tensor(np.asarray(patches, dtype=self.dtype))
        b, n, _ = patches.shape
        deltas = np.broadcast_to(np.asarray(deltas, dtype=self.dtype), (b,))
        for dv in np.unique(deltas):
            check_delta(float(dv))

        x = ad.add(ad.matmul(patches, p["patch_proj.w"]), p["patch_proj.b"])
        x = ad.add(x, p["pos_embed"])

        zeros_row = Tensor(np.zeros((b, 1, self.config.embed_dim), dtype=self.dtype))
        if self.config.use_ace:
            bench = ace_embedding(0.0, p["ace.v1"], p["ace.v2"])
            coeff1 = Tensor(((1.0 + deltas) / 2.0).reshape(b, 1).astype(self.dtype))
            coeff2 = Tensor(((1.0 - deltas) / 2.0).reshape(b, 1).astype(self.dtype))
            adj = ad.add(ad.mul(coeff1, p["ace.v1"]), ad.mul(coeff2, p["ace.v2"]))
            bench_tok = ad.add(zeros_row, ad.reshape(bench, (1, 1, -1)))
            adj_tok = ad.reshape(adj, (b, 1, -1))
            seq = ad.concat([bench_tok, adj_tok, x], axis=1)
            readouts = (0, 1)
        else:
            fixed_tok = ad.add(zeros_row, ad.reshape(p["ace.fixed"], (1, 1, -1)))
            seq = ad.concat([fixed_tok, x], axis=1)
            readouts = (0, 0)

        for i in range(self.config.depth):
            seq = self._block(seq, i)
        seq = self._affine_ln(seq, "final_ln")

        def head(tok_index: int) -> Tensor:
            tok = seq[:, tok_index, :]
            logits = ad.add(ad.matmul(tok, p["head.w"]), p["head.b"])
            return ad.softmax(logits, axis=-1)

        post_bench = head(readouts[0])
        post_adj = post_bench if readouts[1] == readouts[0] else head(readouts[1])
        return post_bench, post_adj

    def forward(self, images, deltas) -> tuple[Tensor, Tensor]:
        """Posterior pair straight from (batch, h, w) images."""
        images = np.asarray(images)
        if images.ndim == 2:
            images = images[None]
        patches = extract_patches_batch(images, self.config.effective_geometry)
        return self.forward_from_patches(patches.astype(self.dtype), deltas)

    def posteriors(self, images, delta: float) -> tuple[np.ndarray, np.ndarray]:
        """Inference-mode (benchmark, adjusted) posterior arrays."""
        with ad.no_grad():
            bench, adj = self.forward(images, delta)
        return bench.data, adj.data

    def positive_probs(self, frames, delta: float) -> np.ndarray:
        """Clean adjusted-token positive probability per frame."""
        _, adj = self.posteriors(frames, delta)
        return adj[:, 1]


def toy_config(**overrides) -> ModelConfig:
    """64x64 desk-scale configuration used across tests and demos."""
    return replace(ModelConfig(), **overrides)


def tiny_config() -> ModelConfig:
    """Smallest useful configuration for finite-difference checks."""
    return ModelConfig(
        geometry=PatchGeometry(16, 16, 4, 8, 4, 4),
        embed_dim=8,
        depth=1,
        heads=2,
        mlp_ratio=2,
    )
