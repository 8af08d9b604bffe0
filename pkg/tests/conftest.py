import pytest

from cloudsched.model import (Datacenter, Host, SimWorld, TaskSpec,
                              UserRequest, VmDescriptor)


def make_vm(vm_id="h000v00", host_id="h000", cpu=1000.0, ram=1740.0,
            storage=10.0, bandwidth=2000.0):
    return VmDescriptor(vm_id, host_id, cpu, ram, storage, bandwidth)


def make_request(user_id="u00000", workloads=(10000.0,), deadline=float("inf"),
                 ram=800.0, storage=1.0, bandwidth=100.0, arrival=0.0):
    tasks = [TaskSpec(f"{user_id}t{i}", wl, ram, storage, bandwidth)
             for i, wl in enumerate(workloads)]
    return UserRequest(user_id, tasks, deadline, arrival=arrival)


def make_world(vm_specs, requests):
    """vm_specs: list of (host_id, [vm kwargs dicts]) or a flat list of VMs."""
    hosts = []
    for host_id, vms in vm_specs:
        hosts.append(Host(host_id, vms))
    return SimWorld.build(Datacenter(hosts), list(requests))


@pytest.fixture
def single_vm_world():
    vm = make_vm()
    req = make_request(workloads=(10000.0, 20000.0, 10000.0))
    return make_world([("h000", [vm])], [req])
