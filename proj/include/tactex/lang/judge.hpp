#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "tactex/lang/explain.hpp"

namespace tactex::lang {

struct JudgeScore {
  int accuracy = 1;
  int completeness = 1;
  int clarity = 1;

  void validate() const;
  /// Success bar used for communicated-success rates.
  bool communicated() const { return accuracy >= 4 && completeness == 5; }
  bool operator==(const JudgeScore&) const = default;
};

/// 1 + floor(4 * fraction), so 1.0 -> 5, 0.75 -> 4, 2/3 -> 3.
int score_from_fraction(double fraction);

/// Hardness statements count as correct within this many HA.
inline constexpr double kJudgeHardnessTolerance = 1.0;
inline constexpr int kMaxSentenceWords = 40;

struct JudgeDetail {
  JudgeScore score;
  /// Per truth object: a sentence names its label and location with a value within tolerance
  /// and, for rated fruits, the right ripeness.
  std::vector<bool> object_correct;
};

/// Rule-based scoring of an explanation against the data it should convey.
JudgeDetail judge_detailed(const std::string& explanation, const ExplanationInput& truth);
JudgeScore judge(const std::string& explanation, const ExplanationInput& truth);

nlohmann::json to_json(const JudgeScore& s);

}  // namespace tactex::lang
