#!/usr/bin/env python3
"""Forward-only reaction key encoder.

Atom features enter as data.  The encoder projects them, lets product atoms
attend to reactant atoms with the atom-map bias, pools each side, splits the
pair into difference and sum, and fuses six projected streams under a softmax
gate.  Output is (z_rxn, z_delta), both of the configured dimension."""
import logging
from dataclasses import dataclass
from typing import Iterable, List, Optional, Sequence

import numpy as np

from .attention import AttentionInputs, biased_cross_attention
from .decompose import RolePooledPair, delta_sigma, role_pool
from .fusion import STREAMS, StreamSet, compute_gates, gated_fusion
from ..ingest.bank import EmbeddingBank
from ..ingest.container import SectionReader, SectionWriter
from ..util.decorators import log_progress, timed
from ..util.errors import DimensionError, FormatError

WEIGHT_SECTIONS = ("w_in", "w_q", "w_k", "w_v", "w_o", "beta",
                   "pool_reactant_w", "pool_reactant_b", "pool_product_w", "pool_product_b",
                   "stream_rp_context", "stream_difference", "stream_sum", "stream_engineered",
                   "stream_dft", "stream_center_difference", "gate_w", "gate_b")


@dataclass(frozen=True)
class ReactionGraphInputs:
    id: str
    reactant_atoms: np.ndarray
    product_atoms: np.ndarray
    atom_map: Optional[np.ndarray] = None
    engineered: Optional[np.ndarray] = None
    dft: Optional[np.ndarray] = None


class ReactionKeyEncoder:
    def __init__(self, weights: SectionReader):
        missing = [name for name in WEIGHT_SECTIONS if name not in weights]
        if missing:
            raise FormatError("Encoder weights in '{}' lack sections: {}.".format(weights.path, ", ".join(missing)))
        self.w = {name: np.asarray(weights[name], dtype=np.float64) for name in WEIGHT_SECTIONS}
        meta = weights.json("meta")
        self.heads = int(meta["heads"])
        self.head_dim = int(meta["head_dim"])
        self.dim = self.w["w_in"].shape[1]
        self.atom_dim = self.w["w_in"].shape[0]
        self.engineered_dim = self.w["stream_engineered"].shape[0]
        self.dft_dim = self.w["stream_dft"].shape[0]
        if self.w["gate_w"].shape != (len(STREAMS) * self.dim, len(STREAMS)):
            raise DimensionError("gate_w has shape {}, expected {}.".format(
                self.w["gate_w"].shape, (len(STREAMS) * self.dim, len(STREAMS))))

    @staticmethod
    def load(path: str) -> "ReactionKeyEncoder":
        encoder = ReactionKeyEncoder(SectionReader(path))
        logging.info("Loaded key encoder from '{}' (d={}, {} heads of {}).".format(
            path, encoder.dim, encoder.heads, encoder.head_dim))
        return encoder

    def _side(self, atoms: np.ndarray, name: str) -> np.ndarray:
        atoms = np.asarray(atoms, dtype=np.float64)
        if atoms.ndim != 2 or atoms.shape[1] != self.atom_dim or atoms.shape[0] == 0:
            raise DimensionError("{} atoms must be a non-empty [n x {}] matrix, got shape {}.".format(
                name, self.atom_dim, atoms.shape))
        return atoms @ self.w["w_in"]

    def _optional(self, vector: Optional[np.ndarray], size: int, name: str) -> np.ndarray:
        if vector is None:
            return np.zeros(size)
        vector = np.asarray(vector, dtype=np.float64)
        if vector.shape != (size,):
            raise DimensionError("{} features must have length {}, got shape {}.".format(name, size, vector.shape))
        return vector

    def streams(self, inputs: ReactionGraphInputs) -> StreamSet:
        return self._forward(inputs)[0]

    def _forward(self, inputs: ReactionGraphInputs):
        w = self.w
        reactants = self._side(inputs.reactant_atoms, "Reactant")
        products = self._side(inputs.product_atoms, "Product")
        attention = AttentionInputs(q=products @ w["w_q"], k=reactants @ w["w_k"], v=reactants @ w["w_v"],
                                    heads=self.heads, head_dim=self.head_dim,
                                    mask=inputs.atom_map, beta=w["beta"])
        context = biased_cross_attention(attention) @ w["w_o"]

        pair = RolePooledPair(r=role_pool(reactants, w["pool_reactant_w"], float(w["pool_reactant_b"][0])),
                              p=role_pool(products + context, w["pool_product_w"], float(w["pool_product_b"][0])))
        z_delta, z_sigma = delta_sigma(pair)

        if attention.has_mask:
            mapped = attention.mask.sum(axis=1) > 0
            aligned = attention.mask[mapped] / attention.mask[mapped].sum(axis=1, keepdims=True)
            center = (products[mapped] - aligned @ reactants).mean(axis=0) if mapped.any() else np.zeros(self.dim)
        else:
            center = np.zeros(self.dim)

        projected = {
            "rp_context": np.concatenate([pair.r, pair.p]) @ w["stream_rp_context"],
            "difference": z_delta @ w["stream_difference"],
            "sum": z_sigma @ w["stream_sum"],
            "engineered": self._optional(inputs.engineered, self.engineered_dim, "Engineered") @ w["stream_engineered"],
            "dft": self._optional(inputs.dft, self.dft_dim, "DFT") @ w["stream_dft"],
            "center_difference": center @ w["stream_center_difference"],
        }
        stacked = np.stack([projected[name] for name in STREAMS])
        return StreamSet(stacked, compute_gates(stacked, w["gate_w"], w["gate_b"])), z_delta

    def encode(self, inputs: ReactionGraphInputs):
        """Returns (z_rxn, z_delta)."""
        streams, z_delta = self._forward(inputs)
        return gated_fusion(streams), z_delta

    @timed("encode_many")
    def encode_many(self, inputs: Sequence[ReactionGraphInputs]) -> EmbeddingBank:
        z_rxn = np.zeros((len(inputs), self.dim))
        z_delta = np.zeros((len(inputs), self.dim))
        for i, item in enumerate(inputs):
            z_rxn[i], z_delta[i] = self.encode(item)
            log_progress("encode", i + 1, len(inputs))
        return EmbeddingBank([item.id for item in inputs], z_rxn, z_delta)


def random_weights(atom_dim: int, dim: int, heads: int, head_dim: int, engineered_dim: int, dft_dim: int,
                   seed: int = 0, beta: float = 1.0) -> SectionWriter:
    """Deterministic random weights for synthetic runs and tests."""
    rng = np.random.default_rng(seed)
    width = heads * head_dim
    shapes = {
        "w_in": (atom_dim, dim), "w_q": (dim, width), "w_k": (dim, width), "w_v": (dim, width), "w_o": (width, dim),
        "pool_reactant_w": (dim,), "pool_reactant_b": (1,), "pool_product_w": (dim,), "pool_product_b": (1,),
        "stream_rp_context": (2 * dim, dim), "stream_difference": (dim, dim), "stream_sum": (dim, dim),
        "stream_engineered": (engineered_dim, dim), "stream_dft": (dft_dim, dim),
        "stream_center_difference": (dim, dim), "gate_w": (len(STREAMS) * dim, len(STREAMS)),
        "gate_b": (len(STREAMS),),
    }
    writer = SectionWriter()
    for name, shape in shapes.items():
        scale = 1.0 / np.sqrt(shape[0])
        writer.write(name, rng.normal(0.0, scale, size=shape))
    writer.write("beta", np.full(heads, float(beta)))
    writer.write_json("meta", {"heads": heads, "head_dim": head_dim})
    return writer


def write_encoder_inputs(path: str, inputs: Iterable[ReactionGraphInputs]):
    writer = SectionWriter()
    ids = []
    for item in inputs:
        ids.append(item.id)
        writer.write("{}/reactants".format(item.id), np.asarray(item.reactant_atoms, dtype=np.float64))
        writer.write("{}/products".format(item.id), np.asarray(item.product_atoms, dtype=np.float64))
        for name in ("atom_map", "engineered", "dft"):
            value = getattr(item, name)
            if value is not None:
                writer.write("{}/{}".format(item.id, name), np.asarray(value, dtype=np.float64))
    writer.write_json("ids", ids)
    writer.save(path)


def load_encoder_inputs(path: str) -> List[ReactionGraphInputs]:
    reader = SectionReader(path)
    inputs = []
    for reaction_id in reader.json("ids"):
        optional = {name: np.array(reader["{}/{}".format(reaction_id, name)])
                    for name in ("atom_map", "engineered", "dft") if "{}/{}".format(reaction_id, name) in reader}
        inputs.append(ReactionGraphInputs(reaction_id, np.array(reader["{}/reactants".format(reaction_id)]),
                                          np.array(reader["{}/products".format(reaction_id)]), **optional))
    return inputs
