#include "edudss/data/synthetic.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <string>

#include "edudss/common/rng.hpp"

namespace edudss::data {

namespace {

struct Level {
  const char* name;
  double probability;
  double effect;  // additive score effect
};

template <std::size_t N>
const Level& draw_level(const std::array<Level, N>& levels, Rng& rng) {
  double u = rng.uniform01();
  for (const auto& level : levels) {
    if (u < level.probability) return level;
    u -= level.probability;
  }
  return levels.back();
}

int poisson(double lambda, Rng& rng) {
  const double limit = std::exp(-lambda);
  double product = rng.uniform01();
  int k = 0;
  while (product > limit) {
    product *= rng.uniform01();
    ++k;
  }
  return k;
}

int uniform_int(int lo, int hi, Rng& rng) {
  return lo + static_cast<int>(rng.uniform_below(static_cast<std::uint64_t>(hi - lo + 1)));
}

constexpr std::array<Level, 3> kInvolvement{{{"Low", 0.20, -1.0}, {"Medium", 0.51, 0.0}, {"High", 0.29, 1.0}}};
constexpr std::array<Level, 3> kResources{{{"Low", 0.20, -1.0}, {"Medium", 0.50, 0.0}, {"High", 0.30, 1.0}}};
constexpr std::array<Level, 2> kExtracurricular{{{"Yes", 0.60, 0.55}, {"No", 0.40, 0.0}}};
constexpr std::array<Level, 3> kMotivation{{{"Low", 0.29, -0.5}, {"Medium", 0.51, 0.0}, {"High", 0.20, 0.5}}};
constexpr std::array<Level, 2> kInternet{{{"Yes", 0.92, 0.9}, {"No", 0.08, 0.0}}};
constexpr std::array<Level, 3> kIncome{{{"Low", 0.40, -0.5}, {"Medium", 0.40, 0.0}, {"High", 0.20, 0.5}}};
constexpr std::array<Level, 3> kTeacher{{{"Low", 0.10, -0.5}, {"Medium", 0.60, 0.0}, {"High", 0.30, 0.5}}};
constexpr std::array<Level, 2> kSchool{{{"Public", 0.70, 0.0}, {"Private", 0.30, 0.0}}};
constexpr std::array<Level, 3> kPeer{{{"Positive", 0.40, 0.5}, {"Neutral", 0.39, 0.0}, {"Negative", 0.21, -0.5}}};
constexpr std::array<Level, 2> kDisability{{{"Yes", 0.10, -0.85}, {"No", 0.90, 0.0}}};
constexpr std::array<Level, 3> kParentEdu{{{"High School", 0.50, -0.5}, {"College", 0.30, 0.0}, {"Postgraduate", 0.20, 0.5}}};
constexpr std::array<Level, 3> kDistance{{{"Near", 0.59, 0.5}, {"Moderate", 0.31, 0.0}, {"Far", 0.10, -0.5}}};
constexpr std::array<Level, 2> kGender{{{"Male", 0.58, 0.0}, {"Female", 0.42, 0.0}}};

}  // namespace

Dataset generate_student_data(std::size_t rows, std::uint64_t seed) {
  Dataset data;
  data.schema = FeatureSchema::student_default();
  Rng rng(seed);

  for (std::size_t r = 0; r < rows; ++r) {
    const double hours = std::clamp(std::round(rng.normal(20.0, 6.0)), 1.0, 44.0);
    const double attendance = uniform_int(60, 100, rng);
    const auto& involvement = draw_level(kInvolvement, rng);
    const auto& resources = draw_level(kResources, rng);
    const auto& extracurricular = draw_level(kExtracurricular, rng);
    const double sleep = uniform_int(4, 10, rng);
    const double previous = uniform_int(50, 100, rng);
    const auto& motivation = draw_level(kMotivation, rng);
    const auto& internet = draw_level(kInternet, rng);
    const double tutoring = std::min(poisson(1.5, rng), 8);
    const auto& income = draw_level(kIncome, rng);
    const auto& teacher = draw_level(kTeacher, rng);
    const auto& school = draw_level(kSchool, rng);
    const auto& peer = draw_level(kPeer, rng);
    double activity = 0.0;
    for (int i = 0; i < 6; ++i) activity += rng.uniform01() < 0.5 ? 1.0 : 0.0;
    const auto& disability = draw_level(kDisability, rng);
    const auto& parent_edu = draw_level(kParentEdu, rng);
    const auto& distance = draw_level(kDistance, rng);
    const auto& gender = draw_level(kGender, rng);

    double score = 40.7 + 0.293 * hours + 0.198 * attendance + 0.049 * previous +
                   0.494 * tutoring + 0.19 * activity - 0.01 * sleep;
    for (const Level* level : {&involvement, &resources, &extracurricular, &motivation,
                               &internet, &income, &teacher, &school, &peer,
                               &disability, &parent_edu, &distance, &gender}) {
      score += level->effect;
    }
    score = std::round(score + rng.normal(0.0, 0.25));
    if (rng.uniform01() < 0.012) score += std::round(4.0 + 24.0 * rng.uniform01());
    score = std::clamp(score, kMinScore, kMaxScore);

    const auto missing_or = [&rng](double rate, const Level& level) -> Cell {
      if (rng.uniform01() < rate) return std::monostate{};
      return std::string(level.name);
    };

    StudentRecord record;
    record.id = "row-" + std::to_string(r);
    record.values = {
        hours,
        attendance,
        std::string(involvement.name),
        std::string(resources.name),
        std::string(extracurricular.name),
        sleep,
        previous,
        std::string(motivation.name),
        std::string(internet.name),
        tutoring,
        std::string(income.name),
        missing_or(0.012, teacher),
        std::string(school.name),
        std::string(peer.name),
        activity,
        std::string(disability.name),
        missing_or(0.014, parent_edu),
        missing_or(0.010, distance),
        std::string(gender.name),
    };
    record.target = score;
    data.append(std::move(record), Provenance::kOriginal);
  }
  return data;
}

}  // namespace edudss::data
