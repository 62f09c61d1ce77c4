"""Entity-resolution-free learning over vertically partitioned peers.

The heavy lifting lives in the compiled extension; this package re-exports it.
"""

from ._core import (  # noqa: F401
    BinningRule,
    BlockRado,
    CommLedger,
    Dataset,
    FoldErrors,
    Model,
    PeerView,
    RadoSet,
    Regularizer,
    Signature,
    apply_bins,
    bh_reject,
    craft_blocks,
    cv_gamma_rados,
    delta_metric,
    enumerate_all_rados,
    enumerate_signatures,
    fit_bins,
    lift,
    load_csv,
    m_loss,
    make_drl_regularizer,
    oracle_baseline,
    oracle_block_sum,
    proj,
    q_metric,
    radocraft,
    run_experiment,
    shared_candidate_order,
    solve_examples,
    solve_rados,
    split_peers,
    square_loss,
    test_error,
    uniform_regularizer,
)

__version__ = "0.1.0"
