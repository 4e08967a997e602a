"""Electrical model of a cylindrical solid-state nanopore.

Closed-form expressions for the open-pore current and for the current
blockage caused by a spherical particle inside the pore.  All quantities
are SI; unit conversions (pA, nm, ...) happen at I/O boundaries only.
"""

from __future__ import annotations

import math
from dataclasses import dataclass


class PhysicsDomainError(ValueError):
    """Raised when an input leaves the physical domain of a formula."""


@dataclass(frozen=True)
class PhysicalConstants:
    """Fundamental constants, fixed in one place.

    elementary_charge : C
    avogadro          : 1/mol
    boltzmann         : J/K
    """

    elementary_charge: float = 1.6e-19
    avogadro: float = 6.02e23
    boltzmann: float = 1.38e-23

    def __post_init__(self):
        if min(self.elementary_charge, self.avogadro, self.boltzmann) <= 0:
            raise PhysicsDomainError("physical constants must be positive")


@dataclass(frozen=True)
class PoreGeometry:
    """Cylindrical pore: diameter and membrane thickness, in meters."""

    diameter: float = 20e-9
    thickness: float = 20e-9

    def __post_init__(self):
        if self.diameter <= 0 or self.thickness <= 0:
            raise PhysicsDomainError("pore diameter and thickness must be > 0")


@dataclass(frozen=True)
class ElectrolyteConfig:
    """Electrolyte and pore-surface properties.

    salt_concentration    : mol/m^3 (100 mol/m^3 == 100 mM)
    cation_mobility       : m^2/(V s)
    anion_mobility        : m^2/(V s)
    surface_charge_density: C/m^2 (signed; negative for SiNx-like walls)
    """

    salt_concentration: float = 100.0
    cation_mobility: float = 7.575e-9
    anion_mobility: float = 7.874e-9
    surface_charge_density: float = -0.02

    def __post_init__(self):
        if self.salt_concentration <= 0:
            raise PhysicsDomainError("salt concentration must be > 0")
        if self.cation_mobility <= 0 or self.anion_mobility <= 0:
            raise PhysicsDomainError("ion mobilities must be > 0")

    @property
    def counterion_mobility(self) -> float:
        """Mobility of the counterions in the surface double layer.

        Cations screen a negative wall, anions a positive one.
        """
        if self.surface_charge_density < 0:
            return self.cation_mobility
        return self.anion_mobility


@dataclass(frozen=True)
class BiasConfig:
    """Applied bias voltage (V) and temperature (K)."""

    voltage: float = 0.3
    temperature: float = 300.0

    def __post_init__(self):
        if self.temperature <= 0:
            raise PhysicsDomainError("temperature must be > 0")


@dataclass(frozen=True)
class OpenPoreResult:
    """All intermediate quantities of the open-pore current computation."""

    resistivity: float        # ohm m
    effective_length: float   # m
    resistance: float         # ohm
    surface_conductance: float  # S
    open_pore_current: float  # A


def resistivity(electrolyte: ElectrolyteConfig,
                constants: PhysicalConstants = PhysicalConstants()) -> float:
    """Bulk electrolyte resistivity, ohm m.

    rho = 1 / (q N_A c0 (mu_c + mu_a))
    """
    q = constants.elementary_charge
    na = constants.avogadro
    c0 = electrolyte.salt_concentration
    mu_sum = electrolyte.cation_mobility + electrolyte.anion_mobility
    denom = q * na * c0 * mu_sum
    if denom <= 0:
        raise PhysicsDomainError("resistivity inputs must be positive")
    return 1.0 / denom


def effective_length(geometry: PoreGeometry) -> float:
    """Effective transport length of the cylindrical pore, m."""
    return 0.92 * geometry.diameter + geometry.thickness


def pore_resistance(geometry: PoreGeometry, rho: float) -> float:
    """Pore resistance R = 4 rho L_eff / (pi d_p^2), ohm."""
    if rho <= 0:
        raise PhysicsDomainError("resistivity must be > 0")
    if geometry.diameter == 0:
        raise PhysicsDomainError("pore diameter must be nonzero")
    l_eff = effective_length(geometry)
    return 4.0 * rho * l_eff / (math.pi * geometry.diameter ** 2)


def surface_conductance(geometry: PoreGeometry,
                        electrolyte: ElectrolyteConfig) -> float:
    """Sidewall surface conductance G_s = mu |sigma| pi d_p / h, siemens.

    Uses the magnitude of the surface charge density; the counterion
    mobility is selected by its sign.
    """
    if geometry.thickness == 0:
        raise PhysicsDomainError("pore thickness must be nonzero")
    mu = electrolyte.counterion_mobility
    sigma = abs(electrolyte.surface_charge_density)
    return mu * sigma * math.pi * geometry.diameter / geometry.thickness


def open_pore_current(geometry: PoreGeometry,
                      electrolyte: ElectrolyteConfig,
                      bias: BiasConfig,
                      constants: PhysicalConstants = PhysicalConstants()
                      ) -> OpenPoreResult:
    """Open-pore current I_0 = V (G_s + 1/R) with all intermediates."""
    rho = resistivity(electrolyte, constants)
    l_eff = effective_length(geometry)
    r = pore_resistance(geometry, rho)
    g_s = surface_conductance(geometry, electrolyte)
    i0 = bias.voltage * (g_s + 1.0 / r)
    return OpenPoreResult(resistivity=rho, effective_length=l_eff,
                          resistance=r, surface_conductance=g_s,
                          open_pore_current=i0)


def blockage_amplitude(i0: float, sphere_diameter: float,
                       pore_diameter: float) -> float:
    """Current blockage of a sphere in the pore: dI = I_0 D_np^2 / d_p^2.

    The sphere must fit through the pore (0 < D_np <= d_p).
    """
    if sphere_diameter <= 0:
        raise PhysicsDomainError("sphere diameter must be > 0")
    if sphere_diameter > pore_diameter:
        raise PhysicsDomainError(
            f"sphere ({sphere_diameter} m) cannot pass the pore "
            f"({pore_diameter} m)")
    return i0 * sphere_diameter ** 2 / pore_diameter ** 2
