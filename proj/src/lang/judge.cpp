#include "tactex/lang/judge.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <map>
#include <regex>
#include <set>
#include <stdexcept>

#include "tactex/lang/location.hpp"

namespace tactex::lang {
namespace {

std::string lower(std::string s) {
  for (auto& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return s;
}

std::vector<std::string> split_sentences(const std::string& text) {
  std::vector<std::string> out;
  std::string cur;
  for (std::size_t i = 0; i < text.size(); ++i) {
    const char c = text[i];
    cur.push_back(c);
    const bool terminal = c == '.' || c == '!' || c == '?';
    const bool at_break = i + 1 == text.size() || std::isspace(static_cast<unsigned char>(text[i + 1]));
    if (terminal && at_break) {
      out.push_back(cur);
      cur.clear();
    }
  }
  auto blank = [](const std::string& s) {
    return std::all_of(s.begin(), s.end(), [](unsigned char c) { return std::isspace(c); });
  };
  if (!blank(cur)) out.push_back(cur);
  for (auto& s : out) {
    const auto b = s.find_first_not_of(" \t\r\n");
    s = b == std::string::npos ? "" : s.substr(b);
  }
  out.erase(std::remove(out.begin(), out.end(), std::string()), out.end());
  return out;
}

bool boundary(const std::string& s, std::size_t pos) {
  if (pos >= s.size()) return true;
  const unsigned char c = s[pos];
  return !(std::isalnum(c) || c == '-');
}

// Position of `phrase` as a whole word (hyphenated words count as one), or npos.
std::size_t find_word(const std::string& s, const std::string& phrase) {
  std::size_t pos = s.find(phrase);
  while (pos != std::string::npos) {
    const bool left = pos == 0 || boundary(s, pos - 1);
    if (left && boundary(s, pos + phrase.size())) return pos;
    pos = s.find(phrase, pos + 1);
  }
  return std::string::npos;
}

bool mentions_label(const std::string& s, const std::string& label) {
  return find_word(s, label) != std::string::npos || find_word(s, label + "s") != std::string::npos ||
         find_word(s, label + "es") != std::string::npos;
}

std::vector<double> numbers_in(const std::string& s) {
  static const std::regex kNumber(R"((\d+(?:\.\d+)?))");
  std::vector<double> out;
  for (auto it = std::sregex_iterator(s.begin(), s.end(), kNumber); it != std::sregex_iterator(); ++it)
    out.push_back(std::stod((*it)[1].str()));
  return out;
}

bool says_unripe(const std::string& s) {
  return s.find("not yet ripe") != std::string::npos || s.find("not ripe") != std::string::npos ||
         find_word(s, "unripe") != std::string::npos;
}

bool says_ripe(const std::string& s) { return find_word(s, "ripe") != std::string::npos && !says_unripe(s); }

bool says_not_found(const std::string& s, const std::string& label) {
  if (!mentions_label(s, label)) return false;
  return s.find("not found") != std::string::npos || s.find("not detected") != std::string::npos ||
         find_word(s, "no " + label) != std::string::npos || s.find("was not") != std::string::npos ||
         s.find("could not") != std::string::npos;
}

}  // namespace

void JudgeScore::validate() const {
  for (int v : {accuracy, completeness, clarity})
    if (v < 1 || v > 5) throw std::invalid_argument("judge score outside [1, 5]");
}

int score_from_fraction(double fraction) {
  if (!(fraction >= 0.0)) return 1;
  return std::min(5, 1 + static_cast<int>(std::floor(4.0 * std::min(fraction, 1.0) + 1e-12)));
}

JudgeScore judge(const std::string& explanation, const ExplanationInput& truth) {
  return judge_detailed(explanation, truth).score;
}

JudgeDetail judge_detailed(const std::string& explanation, const ExplanationInput& truth) {
  JudgeDetail detail;
  detail.object_correct.assign(truth.objects.size(), false);
  JudgeScore& score = detail.score;
  auto sentences = split_sentences(explanation);
  for (auto& s : sentences) s = lower(s);
  if (sentences.empty()) return detail;

  const auto& ws = truth.workspace;
  std::vector<std::string> phrases;
  for (const auto& o : truth.objects) phrases.push_back(describe_location(o.x_mm, o.y_mm, ws).phrase);

  // accuracy over stated facts
  int stated = 0;
  int correct = 0;
  std::vector<bool> covered(truth.objects.size(), false);
  bool ripeness_missing = false;
  for (std::size_t i = 0; i < truth.objects.size(); ++i) {
    const auto& o = truth.objects[i];
    std::vector<const std::string*> about;
    bool label_seen = false;
    for (const auto& s : sentences) {
      if (!mentions_label(s, o.label)) continue;
      label_seen = true;
      if (find_word(s, phrases[i]) != std::string::npos) about.push_back(&s);
    }
    if (!label_seen) continue;
    ++stated;
    if (about.empty()) continue;
    ++correct;
    covered[i] = true;

    ++stated;
    const bool value_ok = std::any_of(about.begin(), about.end(), [&](const std::string* s) {
      const auto nums = numbers_in(*s);
      return std::any_of(nums.begin(), nums.end(),
                         [&](double v) { return std::fabs(v - o.hardness) <= kJudgeHardnessTolerance; });
    });
    correct += value_ok;
    bool ripeness_ok = true;

    const auto rip = interpret_ripeness(o.label, std::clamp(o.hardness, 0.0, 100.0), truth.ripeness);
    if (rip != Ripeness::not_applicable) {
      const bool any_claim = std::any_of(about.begin(), about.end(),
                                         [](const std::string* s) { return says_ripe(*s) || says_unripe(*s); });
      if (!any_claim) {
        ripeness_missing = true;
        ripeness_ok = false;
      } else {
        ++stated;
        const bool ok = std::any_of(about.begin(), about.end(), [&](const std::string* s) {
          return rip == Ripeness::ripe ? says_ripe(*s) : says_unripe(*s);
        });
        correct += ok;
        ripeness_ok = ok;
      }
    }
    detail.object_correct[i] = value_ok && ripeness_ok;
  }

  std::set<std::string> measured;
  for (const auto& o : truth.objects) measured.insert(o.label);
  for (const auto& label : measured) {
    for (const auto& s : sentences) {
      if (says_not_found(s, label)) {
        ++stated;  // claims a measured fruit is missing
        break;
      }
    }
  }
  std::map<std::string, bool> notice;
  std::vector<std::string> missing = truth.not_found;
  missing.insert(missing.end(), truth.not_measured.begin(), truth.not_measured.end());
  for (const auto& label : missing) {
    notice[label] = std::any_of(sentences.begin(), sentences.end(),
                                [&](const std::string& s) { return says_not_found(s, label); });
    if (notice[label]) {
      ++stated;
      ++correct;
    }
  }

  // ranking: the chosen object's location must be the first one named in the ranking sentence
  bool ranking_missing = false;
  if (const auto choice = ranking_choice(truth)) {
    const std::string* ranking = nullptr;
    for (const auto& s : sentences) {
      std::size_t named = 0;
      for (const auto& p : phrases) named += find_word(s, p) != std::string::npos;
      const bool keyword = s.find("est ") != std::string::npos || s.find("most") != std::string::npos ||
                           s.find("least") != std::string::npos || s.rfind("from ", 0) == 0;
      if (keyword && named >= 1 && numbers_in(s).empty()) ranking = &s;
    }
    if (!ranking) {
      ranking_missing = true;
    } else {
      ++stated;
      std::size_t first = std::string::npos;
      std::string first_phrase;
      for (const auto& p : phrases) {
        const auto pos = find_word(*ranking, p);
        if (pos < first) {
          first = pos;
          first_phrase = p;
        }
      }
      correct += first_phrase == phrases[*choice];
    }
  }
  score.accuracy = stated == 0 ? 1 : score_from_fraction(static_cast<double>(correct) / stated);

  // completeness: each target class accounted for
  int units = 0;
  int done = 0;
  std::vector<std::string> classes = truth.intent.targets;
  if (truth.intent.all_fruits()) {
    std::set<std::string> all = measured;
    all.insert(missing.begin(), missing.end());
    classes.assign(all.begin(), all.end());
  }
  for (const auto& c : classes) {
    ++units;
    if (measured.count(c)) {
      bool all = true;
      for (std::size_t i = 0; i < truth.objects.size(); ++i)
        if (truth.objects[i].label == c && !covered[i]) all = false;
      done += all;
    } else {
      done += notice.count(c) && notice[c];
    }
  }
  if (truth.intent.all_fruits() && truth.objects.empty() && missing.empty()) {
    ++units;
    done += std::any_of(sentences.begin(), sentences.end(), [](const std::string& s) {
      return s.find("no fruit") != std::string::npos || s.find("not found") != std::string::npos;
    });
  }
  int comp = units == 0 ? 5 : score_from_fraction(static_cast<double>(done) / units);
  comp -= ranking_missing;
  comp -= ripeness_missing;
  score.completeness = std::max(1, comp);

  // clarity: structure only
  int violations = 0;
  const std::size_t max_sentences = truth.objects.size() + truth.not_found.size() + truth.not_measured.size() + 2;
  if (sentences.size() > max_sentences) ++violations;
  if (std::set<std::string>(sentences.begin(), sentences.end()).size() != sentences.size()) ++violations;
  for (const auto& s : sentences) {
    const auto words = std::count_if(s.begin(), s.end(), [](unsigned char c) { return std::isspace(c); }) + 1;
    if (words > kMaxSentenceWords) {
      ++violations;
      break;
    }
  }
  score.clarity = std::max(1, 5 - 2 * violations);
  return detail;
}

nlohmann::json to_json(const JudgeScore& s) {
  return {{"accuracy", s.accuracy}, {"completeness", s.completeness}, {"clarity", s.clarity}};
}

}  // namespace tactex::lang
