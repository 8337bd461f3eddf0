"""Mirror material properties and the built-in material table."""

from dataclasses import dataclass


@dataclass(frozen=True)
class MaterialProps:
    """Isotropic elastic and optical properties of one mirror material."""

    young_modulus: float    # Pa
    poisson_ratio: float
    loss_angle: float
    refractive_index: float

    def __post_init__(self):
        if self.young_modulus <= 0:
            raise ValueError(f"young_modulus must be positive, got {self.young_modulus}")
        if not 0.0 <= self.poisson_ratio < 0.5:
            raise ValueError(f"poisson_ratio must be in [0, 0.5), got {self.poisson_ratio}")
        if self.loss_angle < 0:
            raise ValueError(f"loss_angle must be nonnegative, got {self.loss_angle}")
        if self.refractive_index < 1:
            raise ValueError(f"refractive_index must be >= 1, got {self.refractive_index}")


# Fused silica mirror substrate
FUSED_SILICA = MaterialProps(
    young_modulus=73e9, poisson_ratio=0.17, loss_angle=1e-5, refractive_index=1.45
)

# SiO2, the low-index coating layer (lossier than bulk silica)
SILICA_COATING = MaterialProps(
    young_modulus=73e9, poisson_ratio=0.17, loss_angle=1e-4, refractive_index=1.45
)

# TiO2:Ta2O5, the high-index coating layer
TITANIA_TANTALA = MaterialProps(
    young_modulus=140e9, poisson_ratio=0.28, loss_angle=4e-4, refractive_index=2.07
)

MATERIALS = {
    "fused_silica": FUSED_SILICA,
    "silica": SILICA_COATING,
    "titania_tantala": TITANIA_TANTALA,
}


def material_name(props: MaterialProps) -> str:
    """Reverse lookup into the built-in table (used when serializing configs)."""
    for name, mat in MATERIALS.items():
        if mat == props:
            return name
    raise KeyError(f"material {props} is not in the built-in table")
