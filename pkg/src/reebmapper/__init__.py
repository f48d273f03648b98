"""Mapper, Joint Contour Nets and Reeb graphs of PL maps, with verified interleavings."""
from __future__ import annotations

from .complex import PLMap, RdSpace, SimplicialComplex, from_arrays, load_mesh, save_mesh
from .cover import Box, Cover, nerve_of_cover, refine, resolution, thicken, uniform_cover
from .interleave import build_interleaving, certified_upper_bound, verify_interleaving
from .mapper import categorical_mapper, f_direct, jcn, lemma61_check, mapper_nerve, pk_evaluate
from .preimage import component_map, components
from .reeb import betti, geometric_mapper, reeb_graph, rgraph_isomorphic

__all__ = [
    "Box", "Cover", "PLMap", "RdSpace", "SimplicialComplex",
    "betti", "build_interleaving", "categorical_mapper", "certified_upper_bound",
    "component_map", "components", "f_direct", "from_arrays", "geometric_mapper",
    "jcn", "lemma61_check", "load_mesh", "mapper_nerve", "nerve_of_cover",
    "pk_evaluate", "reeb_graph", "refine", "resolution", "rgraph_isomorphic",
    "save_mesh", "thicken", "uniform_cover", "verify_interleaving",
]
