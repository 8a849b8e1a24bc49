from fractions import Fraction

from hypothesis import strategies as st

from compreal.dyadic import Dyadic

mantissas = st.integers(min_value=-(2**80), max_value=2**80)
exponents = st.integers(min_value=-120, max_value=120)
dyadics = st.builds(Dyadic, mantissas, exponents)
small_dyadics = st.builds(Dyadic, st.integers(-(2**20), 2**20), st.integers(-24, 4))
unit_dyadics = st.builds(lambda m, e: Dyadic(m, -e), st.integers(-(2**16), 2**16), st.just(16))
rationals = st.builds(Fraction, st.integers(-(10**12), 10**12), st.integers(1, 10**12))
precisions = st.integers(min_value=0, max_value=60)
