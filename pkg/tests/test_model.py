import math

import pytest
from hypothesis import given
from hypothesis import strategies as st

from cloudsched import model
from cloudsched.model import (BatchState, OverlapError, RequestStatus,
                              batch_requirements, checkpoint, reserve)

from conftest import make_request, make_vm


def reqs_for(vm_or_req, workloads=(10000.0,), deadline=math.inf, **kw):
    return batch_requirements(make_request(workloads=workloads,
                                           deadline=deadline, **kw))


class TestAvailableTime:
    def test_idle_vm(self):
        vm = make_vm()
        assert model.available_time(vm, 10.0) == 10.0

    def test_reservation_ending_later(self):
        vm = make_vm(cpu=1000.0)
        reserve(vm, reqs_for(vm, workloads=(30000.0,)), 0.0)
        assert model.available_time(vm, 10.0) == 30.0

    def test_past_reservation_ignored(self):
        vm = make_vm(cpu=1000.0)
        reserve(vm, reqs_for(vm, workloads=(30000.0,)), 0.0)
        assert model.available_time(vm, 40.0) == 40.0


class TestExpectedCompletion:
    def test_direct_formula(self):
        vm = make_vm(cpu=1000.0)
        assert model.expected_completion(vm, 20000.0, 0.0) == pytest.approx(20.0)

    def test_queued_vm(self):
        vm = make_vm(cpu=2500.0)
        reserve(vm, batch_requirements(
            make_request(workloads=(125000.0,))), 0.0)   # busy until 50
        assert model.expected_completion(vm, 10000.0, 0.0) == pytest.approx(54.0)

    def test_extreme_task_on_weakest_vm(self):
        # largest workload at the slowest cpu of the configured ranges
        vm = make_vm(cpu=500.0)
        assert model.expected_completion(vm, 40000.0, 0.0) == pytest.approx(80.0)

    @given(st.floats(min_value=500.0, max_value=2500.0),
           st.floats(min_value=500.0, max_value=2500.0),
           st.floats(min_value=1.0, max_value=4e5))
    def test_monotone_in_cpu(self, cpu_a, cpu_b, workload):
        lo, hi = sorted((cpu_a, cpu_b))
        fast = make_vm(cpu=hi)
        slow = make_vm(cpu=lo)
        assert model.expected_completion(fast, workload, 0.0) <= \
            model.expected_completion(slow, workload, 0.0)

    @given(st.floats(min_value=1.0, max_value=4e5),
           st.floats(min_value=0.0, max_value=4e5))
    def test_monotone_in_workload(self, base, extra):
        vm = make_vm()
        assert model.expected_completion(vm, base, 0.0) <= \
            model.expected_completion(vm, base + extra, 0.0)


class TestFeasible:
    def test_boundary_values_pass(self):
        vm = make_vm(cpu=2500.0, ram=1740.0, storage=10.0, bandwidth=2000.0)
        reqs = batch_requirements(make_request(
            workloads=(25000.0, 25000.0), ram=1200.0, storage=8.0,
            bandwidth=500.0, deadline=5000.0))
        assert model.feasible(vm, reqs, 0.0) is True

    def test_deadline_violation(self):
        vm = make_vm(cpu=2500.0)
        reqs = batch_requirements(make_request(workloads=(50000.0,), deadline=10.0))
        assert model.feasible(vm, reqs, 0.0) is False

    def test_capacity_violation(self):
        vm = make_vm(ram=1250.0)
        reqs = batch_requirements(make_request(workloads=(1000.0,), ram=1251.0))
        assert model.feasible(vm, reqs, 0.0) is False


class TestReserve:
    def test_cumulative_finishes(self):
        vm = make_vm(cpu=1000.0)
        reqs = reqs_for(vm, workloads=(10000.0, 20000.0, 10000.0))
        res = reserve(vm, reqs, 0.0)
        assert res.per_task_finish == pytest.approx([10.0, 30.0, 40.0])
        assert res.end == pytest.approx(40.0)
        assert model.available_time(vm, 0.0) == pytest.approx(40.0)

    def test_append_after_existing(self):
        vm = make_vm(cpu=500.0)
        reserve(vm, reqs_for(vm, workloads=(50000.0,)), 0.0)   # ends at 100
        res = reserve(vm, reqs_for(vm, workloads=(10000.0,)), 100.0)
        assert res.end == pytest.approx(120.0)

    def test_overlap_rejected(self):
        vm = make_vm(cpu=1000.0)
        reserve(vm, reqs_for(vm, workloads=(100000.0,)), 0.0)  # [0, 100]
        with pytest.raises(OverlapError):
            reserve(vm, reqs_for(vm, workloads=(10000.0,)), 50.0)

    @given(st.lists(st.floats(min_value=100.0, max_value=50000.0),
                    min_size=1, max_size=8))
    def test_tail_booking_never_overlaps(self, workloads):
        vm = make_vm(cpu=1000.0)
        for i, wl in enumerate(workloads):
            reqs = batch_requirements(make_request(f"u{i:05d}", workloads=(wl,)))
            reserve(vm, reqs, model.available_time(vm, 0.0))
        model.assert_no_overlap(vm)


class TestCheckpoint:
    def test_progress_reproduces_written_timeline(self):
        vm = make_vm(cpu=1000.0)
        req = make_request(workloads=(10000.0, 20000.0, 10000.0))
        batch = BatchState(req)
        batch.reservation = reserve(vm, batch_requirements(req), 0.0)
        done = checkpoint(batch, vm, 15.0)
        assert done == [0]
        assert batch.finishes[0] == pytest.approx(10.0)
        assert batch.fractions[1] == pytest.approx(0.25)
        done = checkpoint(batch, vm, 40.0)
        assert done == [1, 2]
        assert batch.finishes == pytest.approx([10.0, 30.0, 40.0])
        assert req.status is RequestStatus.COMPLETED

    def test_success_judged_against_current_deadline(self):
        vm = make_vm(cpu=1000.0)
        req = make_request(workloads=(10000.0, 10000.0), deadline=15.0)
        batch = BatchState(req)
        batch.reservation = reserve(vm, batch_requirements(req), 0.0)
        checkpoint(batch, vm, 20.0)
        assert batch.successes == [True, False]

    def test_no_progress_before_start(self):
        vm = make_vm(cpu=1000.0)
        req = make_request(workloads=(10000.0,))
        batch = BatchState(req)
        batch.reservation = reserve(vm, batch_requirements(req), 50.0)
        checkpoint(batch, vm, 30.0)
        assert batch.fractions == [0.0]

    def test_remaining_scales_with_inflation(self):
        # executed fraction is kept; only the un-executed remainder inflates
        vm = make_vm(cpu=1000.0)
        req = make_request(workloads=(10000.0,))
        batch = BatchState(req)
        batch.reservation = reserve(vm, batch_requirements(req), 0.0)
        checkpoint(batch, vm, 5.0)
        assert batch.fractions[0] == pytest.approx(0.5)
        req.tasks[0].workload *= 1.5
        assert batch.remaining_workload(0) == pytest.approx(7500.0)


class TestReleaseRemainder:
    def test_truncates_active_reservation(self):
        vm = make_vm(cpu=1000.0)
        req = make_request(workloads=(10000.0, 10000.0))
        batch = BatchState(req)
        batch.reservation = reserve(vm, batch_requirements(req), 0.0)
        model.release_remainder(batch, vm, 12.0)
        assert batch.reservation is None
        assert vm.reservations[0].effective_end == pytest.approx(12.0)
        assert model.available_time(vm, 12.0) == pytest.approx(12.0)
        assert batch.finishes[0] == pytest.approx(10.0)

    def test_unstarted_reservation_dropped(self):
        vm = make_vm(cpu=1000.0)
        req = make_request(workloads=(10000.0,))
        batch = BatchState(req)
        batch.reservation = reserve(vm, batch_requirements(req), 50.0)
        model.release_remainder(batch, vm, 10.0)
        assert vm.reservations == []


def test_status_forward_transitions(single_vm_world):
    world = single_vm_world
    batch = next(iter(world.batches.values()))
    vm = next(iter(world.vms.values()))
    assert batch.request.status is RequestStatus.PENDING
    batch.reservation = reserve(vm, batch_requirements(batch.request), 0.0)
    batch.request.status = RequestStatus.SCHEDULED
    checkpoint(batch, vm, 1.0)
    assert batch.request.status is RequestStatus.EXECUTING
    checkpoint(batch, vm, batch.reservation.end)
    assert batch.request.status is RequestStatus.COMPLETED
