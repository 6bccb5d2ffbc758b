"""mini-imandra: a desk-scale prover for a pure, terminating functional language.

Conjectures are decided by unsat-core-guided unrolling of recursive functions
over a ground SMT backend, with a reduced inductive waterfall for unbounded
proofs.  Counterexamples come back as executable values.
"""

__version__ = "0.1.0"
