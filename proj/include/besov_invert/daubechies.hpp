#pragma once

#include <array>
#include <span>

namespace besov_invert::filters {

// Orthonormal Daubechies scaling filters, indexed by the number of vanishing
// moments N (2N taps). Taps sum to sqrt(2); sum_t h[t] h[t + 2m] = delta_m0.
// Computed by spectral factorization at 60 significant digits.

inline constexpr std::array<double, 2> kDaubechies1 = {
    0.70710678118654752440,
    0.70710678118654752440};

inline constexpr std::array<double, 4> kDaubechies2 = {
    0.48296291314453414337,
    0.83651630373780790558,
    0.22414386804201338103,
    -0.12940952255126038117};

inline constexpr std::array<double, 6> kDaubechies3 = {
    0.33267055295008261600,
    0.80689150931109257649,
    0.45987750211849157010,
    -0.13501102001025458870,
    -0.085441273882026661693,
    0.035226291885709536603};

inline constexpr std::array<double, 8> kDaubechies4 = {
    0.23037781330889650086,
    0.71484657055291564709,
    0.63088076792985890788,
    -0.027983769416859854211,
    -0.18703481171909308408,
    0.030841381835560763627,
    0.032883011666885199735,
    -0.010597401785069032105};

inline constexpr std::array<double, 10> kDaubechies5 = {
    0.16010239797419291448,
    0.60382926979718967054,
    0.72430852843777292773,
    0.13842814590132073151,
    -0.24229488706638203186,
    -0.032244869584638374648,
    0.077571493840045713523,
    -0.0062414902127982742742,
    -0.012580751999081999469,
    0.0033357252854737712780};

inline constexpr std::array<double, 12> kDaubechies6 = {
    0.11154074335010946362,
    0.49462389039845308568,
    0.75113390802109535068,
    0.31525035170919762909,
    -0.22626469396543982008,
    -0.12976686756726193556,
    0.097501605587323049102,
    0.027522865530305728626,
    -0.031582039317486029565,
    0.00055384220116149613925,
    0.0047772575109455106396,
    -0.0010773010853084795649};

inline constexpr std::array<double, 14> kDaubechies7 = {
    0.077852054085009179020,
    0.39653931948191730654,
    0.72913209084623511992,
    0.46978228740519312247,
    -0.14390600392856497541,
    -0.22403618499387498264,
    0.071309219266830264751,
    0.080612609151083071913,
    -0.038029936935014413580,
    -0.016574541630666880654,
    0.012550998556099840613,
    0.00042957797292136652113,
    -0.0018016407040474909153,
    0.00035371379997452024845};

inline constexpr std::array<double, 16> kDaubechies8 = {
    0.054415842243104009955,
    0.31287159091429997066,
    0.67563073629728980681,
    0.58535468365420671277,
    -0.015829105256349305667,
    -0.28401554296154692652,
    0.00047248457391328277036,
    0.12874742662047845886,
    -0.017369301001807546170,
    -0.044088253930794751507,
    0.013981027917398281649,
    0.0087460940474057767164,
    -0.0048703529934515743104,
    -0.00039174037337694704630,
    0.00067544940645056936637,
    -0.00011747678412476953373};

/// Lowpass taps for `order` vanishing moments; empty span when no table exists.
constexpr std::span<const double> daubechies(int order) {
  switch (order) {
    case 1: return kDaubechies1;
    case 2: return kDaubechies2;
    case 3: return kDaubechies3;
    case 4: return kDaubechies4;
    case 5: return kDaubechies5;
    case 6: return kDaubechies6;
    case 7: return kDaubechies7;
    case 8: return kDaubechies8;
    default: return {};
  }
}

inline constexpr int kMinOrder = 1;
inline constexpr int kMaxOrder = 8;

}  // namespace besov_invert::filters
