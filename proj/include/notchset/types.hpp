#pragma once

#include <complex>
#include <stdexcept>
#include <string>
#include <vector>

namespace notchset {

using cplx = std::complex<double>;
using cvec = std::vector<cplx>;
using dvec = std::vector<double>;

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kTwoPi = 2.0 * kPi;

// Bad argument / malformed input.
struct ParamError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

// Mask leaves no desired bins (V empty) while the SILR term is active.
struct DegenerateMaskError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

inline double db10(double power_ratio) { return 10.0 * std::log10(power_ratio); }
inline double db20(double amp_ratio) { return 20.0 * std::log10(amp_ratio); }

// Wrap an angle into [0, 2*pi).
inline double wrap_phase(double phi) {
    phi = std::fmod(phi, kTwoPi);
    if (phi < 0.0) phi += kTwoPi;
    return phi;
}

}  // namespace notchset
