#pragma once

// Pass/fail thresholds shared by the CLI summaries and the acceptance suite.
namespace statlim::criteria {

// Estimation rate: exact Tikhonov, lambda = n^{-1/2}.
inline constexpr double kRateExponentMin = -0.8;
inline constexpr double kRateExponentMax = -0.3;
inline constexpr double kRateMinRSquared = 0.9;

// Algorithmic error bound.
inline constexpr double kBoundSlope = 1.0;
inline constexpr double kBoundSlopeTolerance = 0.15;

// Matching and measurement experiments.
inline constexpr double kMatchedMaxRatio = 2.0;
inline constexpr double kConstantMinRatio = 5.0;
inline constexpr double kDegradedMinExponent = -0.35;

// Oracle equivalences.
inline constexpr double kDivideConquerTolerance = 1e-10;
inline constexpr double kNystromTolerance = 1e-6;
inline constexpr double kLinearKrrTolerance = 1e-8;
inline constexpr double kEarlyStoppingTolerance = 1e-6;

// Power-law fitter.
inline constexpr double kFitExponentTolerance = 1e-9;
inline constexpr double kFitMinRSquared = 1.0 - 1e-9;

// Runtime ladder.
inline constexpr double kKrrTrainExponentMin = 2.3;
inline constexpr double kKrrTrainExponentMax = 3.5;
inline constexpr double kNystromExponentGap = 0.7;

}  // namespace statlim::criteria
