#pragma once

namespace lyasim {

// Avogadro constant, mol^-1 (2019 SI exact value). Fixed here so molecule
// counts derived from concentrations are reproducible bit for bit.
inline constexpr double avogadro = 6.02214076e23;

// ln(10), used for decadic <-> natural absorbance conversion.
inline constexpr double ln10 = 2.302585092994045684;

}  // namespace lyasim
