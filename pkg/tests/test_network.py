import math

import pytest
from hypothesis import given, settings, strategies as st

import beamsched as bs
from beamsched import (
    BlockageRealization,
    EMPTY_BLOCKAGE,
    InvalidPathError,
    Link,
    Network,
    Path,
    Schedule,
)
from helpers import fig1_network, fig2a_squared, fig4_worst, path_by_nodes


class TestNetworkInvariants:
    def test_rejects_self_loop(self):
        with pytest.raises(ValueError):
            Network(1, (Link(1, 1, 1.0),))

    def test_rejects_link_into_source(self):
        with pytest.raises(ValueError):
            Network(1, (Link(1, 0, 1.0),))

    def test_rejects_link_out_of_destination(self):
        with pytest.raises(ValueError):
            Network(1, (Link(2, 1, 1.0),))

    def test_rejects_duplicates_and_bad_values(self):
        with pytest.raises(ValueError):
            Network(1, (Link(0, 1, 1.0), Link(0, 1, 2.0)))
        with pytest.raises(ValueError):
            Link(0, 1, -1.0)
        with pytest.raises(ValueError):
            Link(0, 1, 1.0, 1.5)

    def test_path_must_be_simple(self):
        with pytest.raises(InvalidPathError):
            Path((0, 1, 1, 2))

    def test_path_must_exist_in_network(self):
        net = fig1_network()
        with pytest.raises(InvalidPathError):
            bs.path_capacity(net, Path((0, 3, 4)))
        with pytest.raises(InvalidPathError):
            bs.path_capacity(net, Path((0, 1, 3)))  # stops short of node 4


class TestPathCapacity:
    def test_fig1_bottlenecks(self):
        net = fig1_network()
        assert bs.path_capacity(net, path_by_nodes(net, 0, 1, 3, 4)) == 3.0
        assert bs.path_capacity(net, path_by_nodes(net, 0, 2, 3, 4)) == 4.0

    def test_single_link_is_identity(self):
        net = Network(0, (Link(0, 1, 2.5),))
        assert bs.path_capacity(net, Path((0, 1))) == 2.5

    def test_zero_capacity_link_zeroes_path(self):
        net = Network(1, (Link(0, 1, 0.0), Link(1, 2, 3.0)))
        assert bs.path_capacity(net, Path((0, 1, 2))) == 0.0


class TestPathSuccess:
    def test_uniform_fifth(self):
        net = Network(
            12, (Link(0, 2, 1.0, 0.2), Link(2, 3, 1.0, 0.2), Link(3, 13, 1.0, 0.2))
        )
        assert bs.path_success(net, Path((0, 2, 3, 13))) == pytest.approx(64 / 125, rel=1e-12)

    def test_zero_blockage_is_certain(self):
        net = fig1_network()
        assert bs.path_success(net, path_by_nodes(net, 0, 1, 3, 4)) == 1.0

    def test_single_lossy_link(self):
        net = fig1_network(shared_prob=2 / 3)
        assert bs.path_success(net, path_by_nodes(net, 0, 2, 3, 4)) == pytest.approx(1 / 3)

    @given(st.lists(st.floats(0.0, 1.0), min_size=1, max_size=6))
    @settings(max_examples=60, derandomize=True)
    def test_concatenation_multiplies(self, probs):
        links = tuple(Link(i, i + 1, 1.0, p) for i, p in enumerate(probs))
        net = Network(len(probs) - 1, links)
        whole = Path(tuple(range(len(probs) + 1)))
        expected = math.prod(1.0 - p for p in probs)
        assert bs.path_success(net, whole) == pytest.approx(expected, abs=1e-12)


class TestEnumeratePaths:
    def test_fig1_two_paths(self):
        paths = bs.enumerate_paths(fig1_network()).paths
        assert [p.nodes for p in paths] == [(0, 1, 3, 4), (0, 2, 3, 4)]

    def test_fig2a_five_paths(self):
        enum = bs.enumerate_paths(fig2a_squared())
        assert len(enum.paths) == 5 and not enum.truncated
        for p in enum.paths:
            assert len(p.nodes) == 3

    def test_disconnected_gives_empty(self):
        net = Network(2, (Link(0, 1, 1.0),))
        assert bs.enumerate_paths(net).paths == ()

    def test_truncation_is_flagged(self):
        enum = bs.enumerate_paths(fig2a_squared(), max_paths=3)
        assert len(enum.paths) == 3 and enum.truncated

    def test_no_duplicates_and_all_valid(self):
        net = fig4_worst()
        enum = bs.enumerate_paths(net)
        assert len(set(enum.paths)) == len(enum.paths)
        for p in enum.paths:
            net.validate_path(p)
        assert [p.nodes for p in enum.paths] == sorted(p.nodes for p in enum.paths)


class TestValidateSchedule:
    def test_fig2a_single_path_full_time(self):
        net = fig2a_squared()
        p5 = path_by_nodes(net, 0, 5, 6)
        check = bs.validate_schedule(net, Schedule({p5: 1.0}))
        assert check.valid
        assert check.transmit[0] == pytest.approx(1.0)

    def test_fig2a_two_full_paths_overbook_source(self):
        net = fig2a_squared()
        sched = Schedule({path_by_nodes(net, 0, 4, 6): 1.0, path_by_nodes(net, 0, 5, 6): 1.0})
        check = bs.validate_schedule(net, sched)
        assert not check.valid
        assert check.transmit[0] == pytest.approx(2.0)

    def test_fig4_proof_schedule_is_valid(self):
        net = fig4_worst()
        sched = Schedule(
            {
                path_by_nodes(net, 0, 6, 2, 3, 4, 5, 13): 0.2,
                path_by_nodes(net, 0, 6, 2, 3, 7, 8, 13): 1.0,
                path_by_nodes(net, 0, 9, 10, 11, 12, 13): 0.3,
            }
        )
        check = bs.validate_schedule(net, sched)
        assert check.valid
        assert max(check.transmit.values()) <= 1.0 + 1e-9
        assert max(check.receive.values()) <= 1.0 + 1e-9

    def test_zero_capacity_link_never_faults(self):
        net = Network(1, (Link(0, 1, 0.0), Link(1, 2, 3.0)))
        check = bs.validate_schedule(net, Schedule({Path((0, 1, 2)): 0.5}))
        assert not check.valid and "zero-capacity" in check.note

    def test_negative_fraction_rejected_at_construction(self):
        with pytest.raises(ValueError):
            Schedule({Path((0, 1)): -0.1})


class TestDeliveredRate:
    def test_fig2a_worst_case_schedule_loses_p5(self):
        net = fig2a_squared()
        p4, p5 = path_by_nodes(net, 0, 4, 6), path_by_nodes(net, 0, 5, 6)
        sched = Schedule({p4: 25 / 41, p5: 16 / 41})
        for blocked_link in [(0, 5), (5, 6)]:
            rate = bs.delivered_rate(net, sched, BlockageRealization(frozenset({blocked_link})))
            assert rate == pytest.approx(400 / 41, rel=1e-12)

    def test_empty_blockage_gives_full_rate(self):
        net = fig2a_squared()
        p5 = path_by_nodes(net, 0, 5, 6)
        assert bs.delivered_rate(net, Schedule({p5: 0.8}), EMPTY_BLOCKAGE) == pytest.approx(20.0)

    def test_all_paths_blocked_gives_zero(self):
        net = fig2a_squared()
        sched = Schedule({p: 0.2 for p in bs.enumerate_paths(net).paths})
        blockage = BlockageRealization(frozenset((0, i) for i in range(1, 6)))
        assert bs.delivered_rate(net, sched, blockage) == 0.0

    @given(st.sets(st.sampled_from([(0, i) for i in range(1, 6)] + [(i, 6) for i in range(1, 6)])))
    @settings(max_examples=60, derandomize=True)
    def test_monotone_in_blockage(self, blocked):
        net = fig2a_squared()
        sched = Schedule({p: 0.2 for p in bs.enumerate_paths(net).paths})
        smaller = BlockageRealization(frozenset(list(blocked)[: len(blocked) // 2]))
        bigger = BlockageRealization(frozenset(blocked) | smaller.blocked)
        assert bs.delivered_rate(net, sched, bigger) <= bs.delivered_rate(net, sched, smaller) + 1e-12

    def test_unknown_link_rejected(self):
        net = fig2a_squared()
        with pytest.raises(ValueError):
            bs.delivered_rate(net, Schedule({}), BlockageRealization(frozenset({(3, 4)})))


class TestFileFormat:
    def test_round_trip_is_lossless(self, tmp_path):
        net = Network(
            2,
            (Link(0, 1, 7.123456789012345, 0.123456789012345), Link(1, 3, 2.0), Link(0, 2, 1e-7), Link(2, 3, 9.0)),
            coords=((0.0, 0.0), (10.5, 3.25), (20.0, 1.0), (30.0, 0.0)),
        )
        file = tmp_path / "net.json"
        bs.save_network(net, str(file))
        again = bs.load_network(str(file))
        assert again == net
        bs.save_network(again, str(tmp_path / "net2.json"))
        assert (tmp_path / "net.json").read_bytes() == (tmp_path / "net2.json").read_bytes()

    def test_paths_round_trip(self, tmp_path):
        net = fig1_network()
        paths = bs.enumerate_paths(net).paths
        file = tmp_path / "paths.json"
        bs.save_paths(paths, str(file))
        assert bs.load_paths(str(file)) == paths
