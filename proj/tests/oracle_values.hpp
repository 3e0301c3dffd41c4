#pragma once

// Reference values from tests/oracles/derive_oracles.py (numpy, scipy,
// cvxpy). Regenerate with that script; do not edit by hand.

namespace oracle {

// sample patient, Ts = 5 s, Q = diag(1, 10, 1, 10), R = I
inline constexpr double kAfd[16] = {0.94322739924598509, 0, 0, 0, 0.011363161075000001, 0.98863683892499998, 0, 0, 0, 0, 0.92903397891340955, 0, 0, 0, 0.04950760655, 0.95049239345000003};
inline constexpr double kBd[8] = {0.73443008225616913, 0, 0, 0, 0, 0.96015099147070393, 0, 0};
inline constexpr double kD[8] = {-0.030143538833333334, -0.010554014636666666, -0, -0, -0, -0, -0.028770217850000002, -0.00073316723816666668};
inline constexpr double kK[8] = {-0.6701188382343396, -1.5804473180981431, -3.4367260646813253e-17, -4.2006930294400703e-16, -2.05772253753551e-17, -3.4823179985663835e-16, -0.67591255564348141, -1.2671785640647826};
inline constexpr double kP[16] = {1.9114446638901579, 4.4208392212051386, 1.0055367355855936e-16, 1.3508903545453381e-15, 4.4208392212051386, 218.03217090755464, 1.1104588372100638e-15, 4.8637198355733892e-14, 1.0055367355855936e-16, 1.1104588372100638e-15, 1.8496521093558813, 3.7561688467582171, 1.3508903545453381e-15, 4.8637198355733892e-14, 3.7561688467582171, 58.574363767015576};
inline constexpr double kSteadyMap[8] = {12.936347331317755, 0, 12.936347331317736, 0, 0, 13.52972840761579, 0, 13.529728407615798};
inline constexpr double kGeff[2] = {2.8940374342992699, 0.70102219728579263};
inline constexpr double kLevel = 0.96334545795696946;
inline constexpr double kMbarWorstCase[2] = {7.4159254569874804, 11.075081529222865};
inline constexpr double kMbarSimulated[2] = {7.4159254005470299, 11.075081529222665};
inline constexpr double kEquilibriumAtUmax[8] = {182.22042419464091, 182.22042419464094, 375.38341773754297, 375.38341773754308, 182.22042419464091, 182.22042419464088, 375.38341773754303, 375.38341773754303};
inline constexpr double kSegmentA[2] = {0.26747019734215449, 0.27000099999999999};
inline constexpr double kSegmentB[2] = {0.120001, 0.87879966453111946};
inline constexpr double kOffsetMinimizer[2] = {0.22423815381797949, 0.44847630763595903};

// MPC from x = 0 (terminal set tests/data/X_a_sample.txt)
inline constexpr double kMpcCost = 3911.5271440991469;
inline constexpr double kMpcV0[2] = {6.6699999999999235, 9.393410981793421};
inline constexpr double kMpcVa[2] = {0.24760759346773137, 0.35200000000000048};

// max c'w over tests/data/lp_regression_*.txt
inline constexpr double kLpRegressionValue = 1.5829663873036375;

}  // namespace oracle
