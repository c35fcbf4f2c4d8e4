"""Average-tree phylogenetic diversity (APD) on rooted phylogenetic networks.

Four engines compute the same exact value and check each other:

* :func:`apd_bruteforce` enumerates all switchings,
* :func:`run_dp` is a dynamic program over a tree-extension,
* :func:`apd_rv` is linear-time on reticulation-visible networks,
* :func:`apd_decomposed` enumerates only invisible reticulations, blob by blob.

:func:`apd` picks one automatically.
"""

from .decomp import apd_by_invisible_switching, apd_decomposed
from .engines import apd, apd_report, choose_engine, gamma
from .errors import (
    ApdError,
    ContractError,
    InputError,
    NotReticulationVisibleError,
    PreconditionError,
    ResourceError,
)
from .extension import (
    TreeExtension,
    bags,
    extension_from_order,
    scanwidth_exact,
    scanwidth_heuristic,
    validate_extension,
    width,
)
from .maxapd import (
    NapInstance,
    construct_hardness_instance,
    epd,
    max_apd_exact,
    max_apd_greedy,
)
from .network import (
    Edge,
    PhyloNetwork,
    biconnected_components,
    induce,
    invisible_reticulations,
    is_reticulation_visible,
    is_visible,
    level,
    offspring,
    validate,
    visible_witness,
)
from .newick import emit_enewick, emit_json, load_network, parse_enewick, parse_json
from .rv import apd_rv, gamma_rv
from .swdp import dp_tables, run_dp
from .switching import (
    SwitchingMask,
    apd_bruteforce,
    combine,
    enumerate_switchings,
    gamma_bruteforce,
    pd_score,
    switching_probability,
)

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
