"""When is a window's flow matrix explainable by smooth dynamics?

A flow matrix is embeddable when some continuous-time process, run for
the window's duration, produces exactly those probabilities.  Windows
whose time-expanded digraph is acyclic always are.  Two-vertex windows
are decided by the determinant's sign.  Larger cyclic windows are
honestly reported as unknown.
"""

import numpy as np
import scipy.linalg

from dcnflow import (
    FlowMatrix,
    ModelParams,
    WindowGrid,
    absorption,
    check_embeddable,
    log_upper_triangular_2x2,
    restricted_temporal_digraph,
    transition_matrix,
    validate_dcn,
)

EXAMPLE = [(1, 4, 1.0), (5, 4, 2.0), (2, 5, 3.0), (4, 3, 4.0)]
PINGPONG = [(1, 2, 0.0), (2, 1, 0.0), (1, 2, 1.0), (2, 1, 1.0)]


def verdict_of(contacts, n, lo, hi, beta):
    dcn = validate_dcn(contacts, n)
    tm = transition_matrix(dcn, WindowGrid((lo, hi)), 1, ModelParams(beta, 0.0))
    flow = absorption(tm)
    return check_embeddable(dcn, flow, restricted_temporal_digraph(dcn, lo, hi)), flow


def main():
    verdict, _ = verdict_of(EXAMPLE, 5, 0.0, 5.0, 1.0)
    print(f"five-vertex example over [0, 5): {verdict.status} ({verdict.reason})")

    # simultaneous reciprocal contacts put a cycle in the digraph, so the
    # acyclic shortcut no longer applies; the determinant still says yes
    verdict, flow = verdict_of(PINGPONG, 2, -1.0, 0.5, 1.0)
    det = np.linalg.det(flow.probs)
    print(f"ping-pong pair over [-1, 0.5): {verdict.status} ({verdict.reason}, det={det:+.4f})")

    # a matrix no smooth two-state process can produce: oscillation
    # stronger than any mixture of exponentials allows
    dcn = validate_dcn(PINGPONG, 2)
    swapper = FlowMatrix(1, np.array([[0.2, 0.8], [0.9, 0.1]]))
    tg = restricted_temporal_digraph(dcn, -1.0, 0.5)
    verdict = check_embeddable(dcn, swapper, tg)
    print(f"hand-built near-swap matrix: {verdict.status} "
          f"({verdict.reason}, det={verdict.determinant:+.4f})")

    # for upper-triangular two-vertex flows the generator is explicit
    p = 0.35
    gen = log_upper_triangular_2x2(p)
    back = scipy.linalg.expm(gen)
    print(f"\ngenerator witness for a one-way flow with hop probability {p}:")
    with np.printoptions(precision=4, suppress=True):
        print(gen)
    print(f"expm recovers [[1-p, p], [0, 1]] to {np.max(np.abs(back - [[1 - p, p], [0, 1]])):.1e}")


if __name__ == "__main__":
    main()
