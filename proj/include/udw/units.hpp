#pragma once

namespace udw {

inline constexpr double kPi = 3.14159265358979323846;

// hbar in eV*ns and eV*fs
inline constexpr double kHbarEvNs = 0.658212e-6;
inline constexpr double kHbarEvFs = 0.658212;

inline constexpr double kNsPerFs = 1e-6;
inline constexpr double kEvPerMeV = 1e-3;

}  // namespace udw
