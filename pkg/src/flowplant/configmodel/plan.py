"""Deployment planning: first-fit-decreasing packing with capacity accounting.

Services are sorted by (diskMb, ramMb) descending, name ascending as the
tie-break, then placed on the first device (in declaration order) that
respects deployableTo and has enough residual disk and RAM. When FFD cannot
place everything, a bounded exhaustive search distinguishes a genuinely
infeasible instance (CapacityExceeded) from a heuristic miss
(PlacementHeuristicFailure).
"""

from __future__ import annotations

from .model import AppSpec, DeploymentPlan, DeviceDef, Resources, ServiceDef
from .generate import InvalidSpec
from .validate import validate

_EXHAUSTIVE_LIMIT = 2_000_000  # max device^service combinations to try


class CapacityExceeded(Exception):
    def __init__(self, service: str, resource: str):
        super().__init__(f"service {service!r} cannot be placed; binding resource: {resource}")
        self.service = service
        self.resource = resource


class PlacementHeuristicFailure(Exception):
    def __init__(self, service: str):
        super().__init__(
            f"first-fit-decreasing failed at service {service!r}, but a feasible placement exists"
        )
        self.service = service


def _eligible(svc: ServiceDef, dev: DeviceDef) -> bool:
    return svc.deployable_to == "any" or svc.deployable_to == dev.kind


def _ffd_order(services) -> list[ServiceDef]:
    return sorted(
        services,
        key=lambda s: (-s.resources.disk_mb, -s.resources.ram_mb, s.name),
    )


def _try_assignment(services, devices, assignment: dict[str, str]) -> dict[str, Resources] | None:
    free = {d.name: [d.ram_mb, d.disk_mb] for d in devices}
    by_name = {d.name: d for d in devices}
    for svc in services:
        dev = by_name[assignment[svc.name]]
        if not _eligible(svc, dev):
            return None
        ram, disk = free[dev.name]
        if svc.resources.ram_mb > ram or svc.resources.disk_mb > disk:
            return None
        free[dev.name] = [ram - svc.resources.ram_mb, disk - svc.resources.disk_mb]
    return {name: Resources(ram_mb=v[0], disk_mb=v[1]) for name, v in free.items()}


def exhaustive_place(services, devices) -> dict[str, str] | None:
    """Backtracking search over all assignments; None when infeasible.

    Used as the honest second route when FFD fails, and by tests as the
    oracle. Raises ValueError when the instance is too large to enumerate.
    """
    services = list(services)
    if len(devices) ** max(len(services), 1) > _EXHAUSTIVE_LIMIT:
        raise ValueError("instance too large for exhaustive placement")
    free = {d.name: [d.ram_mb, d.disk_mb] for d in devices}
    assignment: dict[str, str] = {}

    def backtrack(index: int) -> bool:
        if index == len(services):
            return True
        svc = services[index]
        for dev in devices:
            if not _eligible(svc, dev):
                continue
            ram, disk = free[dev.name]
            if svc.resources.ram_mb > ram or svc.resources.disk_mb > disk:
                continue
            free[dev.name] = [ram - svc.resources.ram_mb, disk - svc.resources.disk_mb]
            assignment[svc.name] = dev.name
            if backtrack(index + 1):
                return True
            free[dev.name] = [ram, disk]
            del assignment[svc.name]
        return False

    return dict(assignment) if backtrack(0) else None


def _binding_resource(svc: ServiceDef, devices, free: dict[str, list[int]]) -> str:
    eligible = [d for d in devices if _eligible(svc, d)]
    if not eligible:
        return "deployableTo"
    if any(free[d.name][1] >= svc.resources.disk_mb for d in eligible):
        return "ram"
    return "disk"


def plan_deployment(spec: AppSpec, devices: list[DeviceDef]) -> DeploymentPlan:
    diagnostics = validate(spec)
    if diagnostics:
        raise InvalidSpec(diagnostics)
    return plan_services(spec.services, devices)


def plan_services(services, devices: list[DeviceDef]) -> DeploymentPlan:
    if not devices and services:
        raise CapacityExceeded(_ffd_order(services)[0].name, "deployableTo")
    free = {d.name: [d.ram_mb, d.disk_mb] for d in devices}
    assignments: dict[str, str] = {}
    for svc in _ffd_order(services):
        placed = False
        for dev in devices:
            if not _eligible(svc, dev):
                continue
            ram, disk = free[dev.name]
            if svc.resources.ram_mb <= ram and svc.resources.disk_mb <= disk:
                free[dev.name] = [ram - svc.resources.ram_mb, disk - svc.resources.disk_mb]
                assignments[svc.name] = dev.name
                placed = True
                break
        if not placed:
            # Atomic failure: distinguish infeasible from heuristic miss.
            try:
                alternative = exhaustive_place(services, devices)
            except ValueError:
                alternative = None
            if alternative is not None:
                raise PlacementHeuristicFailure(svc.name)
            raise CapacityExceeded(svc.name, _binding_resource(svc, devices, free))
    residuals = {name: Resources(ram_mb=v[0], disk_mb=v[1]) for name, v in free.items()}
    return DeploymentPlan(assignments=assignments, residuals=residuals)
