from cotp import seeding


def test_reference_stream():
    # published SplitMix64 outputs for state 0
    want = [0xE220A8397B1DCDAF, 0x6E789E6AA1B965F4, 0x06C45D188009454F]
    assert seeding.trial_seeds(0, 3) == want


def test_order_independent():
    seeds = seeding.trial_seeds(12345, 50)
    assert [seeding.derive_seed(12345, i) for i in reversed(range(50))] == seeds[::-1]
    assert len(set(seeds)) == 50


def test_64_bit_range():
    for s in seeding.trial_seeds(2**64 - 1, 20):
        assert 0 <= s < 2**64
