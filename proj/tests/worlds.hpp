#pragma once
// Small knowledge bases of users, unrelated statements and ratings.

#include <algorithm>
#include <cmath>
#include <random>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "cbkb/evaluation.hpp"
#include "cbkb/notation.hpp"
#include "cbkb/protocol.hpp"
#include "oracles.hpp"

namespace cbkb::test {

inline constexpr const char* kDate = "2024-01-01T00:00:00Z";

inline void require_ok(const EditOutcome& o, const std::string& what) {
  if (!o.ok()) throw std::runtime_error(what + ": " + describe(o));
}

inline EditOutcome run(KnowledgeBase& kb, const std::string& agent, const std::string& text) {
  return apply_command(kb, agent, parse_command(text, ParseOptions{agent}), EditContext{kDate});
}

// Users each holding a few unrelated possible-beliefs, plus ratings between them.
struct World {
  KnowledgeBase kb = KnowledgeBase::preloaded();
  oracle::RatingWorld oracle;
  std::vector<std::string> statements;
};

inline World random_world(std::mt19937& rng, std::size_t users, std::size_t per_user,
                   double rating_density) {
  World w;
  require_ok(run(w.kb, "pm", "register pm;"), "register pm");
  std::string fl = "thing subtype:";
  for (std::size_t i = 0; i < 2 * users * per_user; ++i) fl += " t#c" + std::to_string(i);
  require_ok(run(w.kb, "pm", fl + " (t);"), fl);
  w.oracle.users = {"pm", "t"};

  std::size_t next = 0;
  for (std::size_t u = 0; u < users; ++u) {
    std::string user = "u" + std::to_string(u + 1);
    require_ok(run(w.kb, "pm", "register " + user + ";"), user);
    w.oracle.users.push_back(user);
    for (std::size_t k = 0; k < per_user; ++k, next += 2) {
      std::string text = "t#c" + std::to_string(next) + " part: t#c" + std::to_string(next + 1) + ";";
      EditOutcome o = run(w.kb, user, text);
      require_ok(o, text);
      w.statements.push_back(o.created.back());
      w.oracle.creator[o.created.back()] = user;
    }
  }

  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (const std::string& s : w.statements) {
    for (std::size_t u = 0; u < users; ++u) {
      if (unit(rng) >= rating_density) continue;
      std::string rater = "u" + std::to_string(u + 1);
      double v = std::round(unit(rng) * 100) / 100;
      require_ok(submit_rating(w.kb, rater, s, "acceptance", v, kDate), "rating");
      w.oracle.ratings[s].emplace_back(rater, v);
    }
  }
  return w;
}

inline std::set<std::string> visible(const KnowledgeBase& kb, double threshold,
                              const std::vector<std::string>& objects) {
  FilterDef f{"hide", "(>= (score) " + std::to_string(threshold) + ")"};
  std::set<std::string> out;
  for (const auto& [id, action] : apply_filter(kb, f, objects)) {
    if (action == DisplayAction::show) out.insert(id);
  }
  return out;
}

}  // namespace cbkb::test
