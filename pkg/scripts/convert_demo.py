"""Convert the 6-state benchmark HMM into HQMMs and compare likelihoods on sampled data.

Also factors the transition unitary of the circuit construction into
two-row rotations and reports the reconstruction error.
"""
import argparse

import numpy as np

from hqmm.convert import col_stochastic_to_unitary, hmm_to_hqmm_circuit, hmm_to_hqmm_sqrt, prior_state
from hqmm.givens import factor_unitary, product
from hqmm.hmm import hmm_loglik_batch, hmm_sample
from hqmm.model import hqmm_loglik_batch
from hqmm.models import handwritten_hmm_6x6


def main():
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--sequences", type=int, default=20)
    p.add_argument("--length", type=int, default=200)
    p.add_argument("--seed", type=int, default=0)
    args = p.parse_args()

    hmm = handwritten_hmm_6x6()
    children = np.random.SeedSequence(args.seed).spawn(args.sequences)
    seqs = np.array([hmm_sample(hmm, args.length, 100, c) for c in children])
    ref = hmm_loglik_batch(hmm, seqs)
    for name, convert in [("circuit", hmm_to_hqmm_circuit), ("sqrt", hmm_to_hqmm_sqrt)]:
        kraus = convert(hmm)
        diff = np.abs(hqmm_loglik_batch(kraus, seqs, prior_state(hmm)) - ref).max()
        print(f"{name:8s} n={kraus.n} s={kraus.s} w={kraus.w} completeness {kraus.completeness_error():.1e} "
              f"max |dloglik| {diff:.1e}")

    U = col_stochastic_to_unitary(hmm.A)
    rots = factor_unitary(U)
    err = np.linalg.norm(product(rots, U.shape[0]) - U)
    print(f"transition unitary {U.shape[0]}x{U.shape[0]}: {len(rots)} rotations, reconstruction error {err:.1e}")


if __name__ == "__main__":
    main()
