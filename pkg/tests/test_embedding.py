"""Channel-fusion semantics against an element-by-element scalar oracle."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mrifuse.embedding import EmbedConfig, EmbedMode, ModalitySet, embed
from mrifuse.errors import (
    InvalidConfig,
    KindMismatch,
    MissingWeight,
    ModeKindConflict,
    ShapeMismatch,
)
from mrifuse.volume import ACQUISITION_MODALITIES, Modality, Volume

FLAIR, T1, T2, T1CE = ACQUISITION_MODALITIES


def oracle_embed(member_arrays, weights, n, c, mode):
    """Per-voxel scalar-loop reference; members keyed by modality.

    Traverses channels in canonical FLAIR, T1, T2, T1ce order, mirroring
    the documented contract.
    """
    mods = [m for m in ACQUISITION_MODALITIES if m in member_arrays]
    shape = member_arrays[mods[0]].shape
    out = np.zeros(shape, dtype=np.float32 if mode is EmbedMode.REAL else np.uint8)
    for x in range(shape[0]):
        for y in range(shape[1]):
            for z in range(shape[2]):
                if mode is EmbedMode.REAL:
                    acc = 0.0
                    for m in mods:
                        acc += weights[m] * float(member_arrays[m][x, y, z])
                    out[x, y, z] = np.float32(acc / n + c)
                elif mode is EmbedMode.WRAP_U8:
                    acc = 0
                    for m in mods:
                        term = int(np.rint(weights[m] * float(member_arrays[m][x, y, z])))
                        acc = (acc + term) % 256
                    out[x, y, z] = (acc // n + round(c)) % 256
                else:
                    acc = 0
                    for m in mods:
                        term = int(np.rint(weights[m] * float(member_arrays[m][x, y, z])))
                        acc = min(max(acc + term, 0), 255)
                    out[x, y, z] = min(max(acc // n + round(c), 0), 255)
    return out


def const_u8(value, shape=(2, 2, 2)):
    return Volume(np.full(shape, value, dtype=np.uint8))


def modality_set(arrays):
    return ModalitySet({m: Volume(a, modality=m) for m, a in arrays.items()})


class TestRealMode:
    def test_mean_of_four_identical_volumes_is_identity(self, rng):
        data = rng.uniform(0, 500, size=(5, 4, 3)).astype(np.float32)
        mods = modality_set({m: data.copy() for m in ACQUISITION_MODALITIES})
        out = embed(mods, EmbedConfig())
        assert np.array_equal(out.data, data)

    def test_constant_pair_average(self):
        mods = ModalitySet({FLAIR: const_u8(200), T1: const_u8(100)})
        out = embed(mods, EmbedConfig(mode=EmbedMode.REAL))
        assert np.all(out.data == 150.0)
        assert out.data.dtype == np.float32

    def test_matches_scalar_loop_oracle(self, rng):
        arrays = {
            m: rng.integers(0, 256, size=(6, 5, 4)).astype(np.uint8)
            for m in ACQUISITION_MODALITIES
        }
        cfg = EmbedConfig()
        out = embed(modality_set(arrays), cfg)
        expected = oracle_embed(arrays, cfg.weights, 4, 0.0, EmbedMode.REAL)
        assert np.array_equal(out.data, expected)

    def test_matches_oracle_with_uneven_weights_and_offset(self, rng):
        arrays = {
            m: rng.uniform(0, 300, size=(4, 4, 3)).astype(np.float32)
            for m in (FLAIR, T1, T2)
        }
        weights = {FLAIR: 0.25, T1: 1.5, T2: -0.75}
        cfg = EmbedConfig(weights=weights, offset_c=10.0, divisor_n=2)
        out = embed(modality_set(arrays), cfg)
        expected = oracle_embed(arrays, weights, 2, 10.0, EmbedMode.REAL)
        assert np.array_equal(out.data, expected)

    def test_output_tagged_embedded(self):
        mods = ModalitySet({FLAIR: const_u8(1), T1: const_u8(2)})
        assert embed(mods, EmbedConfig()).modality is Modality.EMBEDDED


class TestIntegerModes:
    def test_wrap_vs_saturate_vs_real_on_200_plus_100(self):
        mods = ModalitySet({FLAIR: const_u8(200), T1: const_u8(100)})
        wrap = embed(mods, EmbedConfig(mode=EmbedMode.WRAP_U8))
        sat = embed(mods, EmbedConfig(mode=EmbedMode.SATURATE_U8))
        real = embed(mods, EmbedConfig(mode=EmbedMode.REAL))
        assert np.all(wrap.data == 22)        # (300 mod 256) // 2
        assert np.all(sat.data == 127)        # min(300, 255) // 2
        assert np.all(real.data == 150.0)
        assert wrap.data.dtype == np.uint8 and sat.data.dtype == np.uint8

    @pytest.mark.parametrize("mode", [EmbedMode.WRAP_U8, EmbedMode.SATURATE_U8])
    def test_matches_oracle_on_random_u8(self, rng, mode):
        arrays = {
            m: rng.integers(0, 256, size=(5, 4, 3)).astype(np.uint8)
            for m in ACQUISITION_MODALITIES
        }
        cfg = EmbedConfig(mode=mode)
        out = embed(modality_set(arrays), cfg)
        expected = oracle_embed(arrays, cfg.weights, 4, 0.0, mode)
        assert np.array_equal(out.data, expected)

    @pytest.mark.parametrize("mode", [EmbedMode.WRAP_U8, EmbedMode.SATURATE_U8])
    def test_fractional_weights_round_half_even(self, rng, mode):
        arrays = {
            m: rng.integers(0, 256, size=(4, 3, 3)).astype(np.uint8)
            for m in (FLAIR, T2)
        }
        weights = {FLAIR: 0.5, T2: 1.25}
        cfg = EmbedConfig(weights=weights, offset_c=3.0, mode=mode)
        out = embed(modality_set(arrays), cfg)
        expected = oracle_embed(arrays, weights, 2, 3.0, mode)
        assert np.array_equal(out.data, expected)

    def test_offset_wraps_vs_saturates(self):
        mods = ModalitySet({FLAIR: const_u8(250), T1: const_u8(250)})
        wrap = embed(mods, EmbedConfig(offset_c=20.0, divisor_n=1, mode=EmbedMode.WRAP_U8))
        sat = embed(mods, EmbedConfig(offset_c=20.0, divisor_n=1, mode=EmbedMode.SATURATE_U8))
        # wrap: 250 + 250 = 244 (mod 256); 244 + 20 = 264 -> 8
        assert np.all(wrap.data == 8)
        # saturate: 250 + 250 -> 255; 255 + 20 -> 255
        assert np.all(sat.data == 255)


class TestProperties:
    def test_shape_preserved_every_mode(self, rng):
        arrays = {
            m: rng.integers(0, 256, size=(3, 5, 7)).astype(np.uint8)
            for m in (FLAIR, T1, T2)
        }
        for mode in EmbedMode:
            out = embed(modality_set(arrays), EmbedConfig(mode=mode))
            assert out.shape == (3, 5, 7)

    @pytest.mark.parametrize("k", [0.25, 0.5, 2.0, 8.0])
    def test_weight_homogeneity_power_of_two(self, rng, k):
        arrays = {
            m: rng.integers(0, 256, size=(4, 4, 4)).astype(np.uint8)
            for m in ACQUISITION_MODALITIES
        }
        weights = {FLAIR: 1.0, T1: 0.5, T2: 2.0, T1CE: 1.5}
        base = embed(modality_set(arrays), EmbedConfig(weights=weights))
        scaled = embed(
            modality_set(arrays),
            EmbedConfig(weights={m: k * w for m, w in weights.items()}),
        )
        assert np.array_equal(scaled.data, (k * base.data.astype(np.float64)).astype(np.float32))

    def test_permutation_of_members_is_invariant(self, rng):
        arrays = {
            m: rng.integers(0, 256, size=(4, 4, 4)).astype(np.uint8)
            for m in ACQUISITION_MODALITIES
        }
        forward = {m: Volume(arrays[m], modality=m) for m in ACQUISITION_MODALITIES}
        backward = {m: Volume(arrays[m], modality=m) for m in reversed(ACQUISITION_MODALITIES)}
        for mode in EmbedMode:
            cfg = EmbedConfig(mode=mode)
            a = embed(ModalitySet(forward), cfg)
            b = embed(ModalitySet(backward), cfg)
            assert np.array_equal(a.data, b.data)

    @pytest.mark.parametrize("t", [-7, 3, 40])
    def test_offset_shifts_real_output_exactly(self, rng, t):
        # integer inputs and a power-of-two divisor keep float32 rounding exact
        arrays = {
            m: rng.integers(0, 256, size=(4, 4, 4)).astype(np.uint8)
            for m in ACQUISITION_MODALITIES
        }
        with_c = embed(modality_set(arrays), EmbedConfig(offset_c=float(t)))
        without = embed(modality_set(arrays), EmbedConfig(offset_c=0.0))
        assert np.array_equal(with_c.data - without.data, np.full((4, 4, 4), t, np.float32))

    def test_wrap_and_saturate_diverge_somewhere(self):
        mods = ModalitySet({FLAIR: const_u8(200), T1: const_u8(100)})
        wrap = embed(mods, EmbedConfig(mode=EmbedMode.WRAP_U8))
        sat = embed(mods, EmbedConfig(mode=EmbedMode.SATURATE_U8))
        assert not np.array_equal(wrap.data, sat.data)


@settings(max_examples=40, deadline=None)
@given(
    seed=st.integers(0, 2**31),
    n_members=st.integers(2, 4),
    mode=st.sampled_from(list(EmbedMode)),
)
def test_oracle_agreement_property(seed, n_members, mode):
    rng = np.random.default_rng(seed)
    mods = list(ACQUISITION_MODALITIES[:n_members])
    arrays = {m: rng.integers(0, 256, size=(3, 3, 2)).astype(np.uint8) for m in mods}
    cfg = EmbedConfig(mode=mode)
    out = embed(modality_set(arrays), cfg)
    expected = oracle_embed(arrays, cfg.weights, n_members, 0.0, mode)
    assert np.array_equal(out.data, expected)


class TestErrors:
    def test_mixed_kinds_rejected(self):
        members = {
            FLAIR: Volume(np.zeros((2, 2, 2), np.uint8)),
            T1: Volume(np.zeros((2, 2, 2), np.float32)),
        }
        with pytest.raises(KindMismatch):
            ModalitySet(members)

    def test_mismatched_shapes_rejected(self):
        members = {
            FLAIR: Volume(np.zeros((2, 2, 2), np.uint8)),
            T1: Volume(np.zeros((3, 2, 2), np.uint8)),
        }
        with pytest.raises(ShapeMismatch):
            ModalitySet(members)

    def test_integer_mode_on_float_inputs(self):
        members = {
            FLAIR: Volume(np.zeros((2, 2, 2), np.float32)),
            T1: Volume(np.zeros((2, 2, 2), np.float32)),
        }
        with pytest.raises(ModeKindConflict):
            embed(ModalitySet(members), EmbedConfig(mode=EmbedMode.WRAP_U8))

    def test_missing_weight(self):
        mods = ModalitySet({FLAIR: const_u8(1), T1: const_u8(2)})
        with pytest.raises(MissingWeight):
            embed(mods, EmbedConfig(weights={FLAIR: 1.0}))

    def test_bad_divisor(self):
        with pytest.raises(InvalidConfig):
            EmbedConfig(divisor_n=0)

    def test_too_few_members(self):
        with pytest.raises(InvalidConfig):
            ModalitySet({FLAIR: const_u8(1)})
