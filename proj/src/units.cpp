#include "cqed/units.hpp"

#include <cmath>
#include <stdexcept>

namespace cqed {

namespace {

void require_positive(double v, const char* what)
{
    if (!(v > 0.0) || !std::isfinite(v))
        throw std::invalid_argument(std::string(what) + " must be positive and finite");
}

}  // namespace

Energy wavelength_to_energy(Wavelength lambda)
{
    require_positive(lambda.value, "wavelength");
    return Energy{constants::hc_ueV_nm / lambda.value};
}

Wavelength energy_to_wavelength(Energy e)
{
    require_positive(e.value, "energy");
    return Wavelength{constants::hc_ueV_nm / e.value};
}

Duration linewidth_to_lifetime(Energy gamma)
{
    require_positive(gamma.value, "linewidth");
    return Duration{constants::hbar_ueV_ps / gamma.value};
}

Energy lifetime_to_linewidth(Duration tau)
{
    require_positive(tau.value, "lifetime");
    return Energy{constants::hbar_ueV_ps / tau.value};
}

double q_factor(Energy e, Energy gamma_c)
{
    require_positive(e.value, "energy");
    require_positive(gamma_c.value, "cavity linewidth");
    return e.value / gamma_c.value;
}

double energy_per_nm(Wavelength lambda)
{
    require_positive(lambda.value, "wavelength");
    return constants::hc_ueV_nm / (lambda.value * lambda.value);
}

}  // namespace cqed
