#pragma once

// Frozen output of oracle/derive_golden.py. Regenerate with that script.

namespace golden {

inline constexpr double kFormulaEffects[] = {
    0.8414709848078965,
    0.1678264420177853,
    -0.6003509767480293,
    -0.7657489453855806,
    -1.700395259471035,
    0.8116823344464273,
    2.5162618501299567,
    0.6186118168259609,
    -0.3293524995661399,
    -0.8239660381489118,
    -0.5117577150444308,
    2.385305830066975,
    2.008443811055919,
    0.9148975805529287,
    -0.6740323550070209,
    -3.546800177197767,
    -1.7028684766874533,
    0.3425838030900955,
    2.0116256782905384,
    1.518406741342375,
    3.798448389886648,
    -1.667599527380768,
    -5.1104125943836936,
    -0.3851206227877484,
    1.4583982413479237,
    1.7084659936184068,
    0.6892106920041974,
    -4.5183439666977785,
    -4.137779075586726,
    -1.0782883280758577,
    2.6390516596483837,
    6.173551390278213};
inline constexpr double kPolynomialEffects[] = {
    0.3,
    0.39999999999999997,
    0.0,
    3.0,
    0.0,
    1.4999999999999998,
    0.0,
    6.661338147750939e-16,
    0.0,
    1.1,
    0.0,
    2.220446049250313e-16,
    0.0,
    2.220446049250313e-16,
    1.0499999999999998,
    2.220446049250313e-16};
inline constexpr double kSecondMoments[] = {
    1.1354784509,
    1.0013005400780044,
    1.2448,
    1.061520150601};
inline constexpr double kJaccard[] = {
    0.08695652173913043};
inline constexpr double kCubeStrength[] = {
    1.0,
    1.3419940588670007,
    2.0531544247673716,
    0.7954984665946669,
    0.09623247101327932};
inline constexpr double kSpearman[] = {
    0.9276336570439175};
inline constexpr double kMlpLogitEffects[] = {
    -1.7397883189789725,
    -0.85340648243232,
    -0.3594499330138339,
    0.9486682183597721,
    -2.96178109429551,
    0.6578536369134551,
    2.1422124186906073,
    -0.7255554923705145};

}  // namespace golden
