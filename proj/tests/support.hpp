#pragma once
// Helpers shared by the test binaries.

#include <gtest/gtest.h>

#include <fstream>
#include <sstream>
#include <string>

#include "cbkb/error.hpp"
#include "cbkb/service.hpp"

namespace cbkb::test {

inline std::string read_data(const std::string& name) {
  std::ifstream in(std::string(CBKB_TEST_DATA) + "/" + name, std::ios::binary);
  EXPECT_TRUE(in.good()) << name;
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline Service::Options fixed_clock(const std::string& stamp = "2024-01-01T00:00:00Z") {
  return Service::Options{std::nullopt, [stamp] { return stamp; }};
}

// Every command of the script must succeed.
inline void run_ok(Service& s, const std::string& script, const std::string& agent = "pm") {
  for (const ScriptResult& r : run_script(s, script, agent)) {
    ASSERT_LT(r.response.status, 400) << "line " << r.line << ": " << r.command << "\n"
                                      << r.response.body.dump(2);
  }
}

template <class F>
ErrorCode error_code_of(F&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no error thrown";
  return ErrorCode::parse_error;
}

}  // namespace cbkb::test
