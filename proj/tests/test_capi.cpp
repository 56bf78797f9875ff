// Exercises the shared library through its C header only.
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cstdlib>
#include <filesystem>
#include <string>

#include "doctest.h"
#include "tubesynth/tubesynth.h"

namespace fs = std::filesystem;

namespace {

const std::string kR2 = TUBESYNTH_SOURCE_DIR "/configs/manipulator_2r/experiment.json";

fs::path scratch(const char* name) {
  const fs::path p = fs::temp_directory_path() / name;
  fs::remove_all(p);
  return p;
}

}  // namespace

TEST_CASE("version and status names") {
  CHECK(std::string(tsyn_version()).size() > 0);
  CHECK(std::string(tsyn_status_name(TSYN_OK)) == "ok");
  CHECK(std::string(tsyn_status_name(TSYN_INVALID_ARGUMENT)) == "invalid argument");
  CHECK(std::string(tsyn_status_name(static_cast<tsyn_status>(99))) == "unknown status");
}

TEST_CASE("invalid arguments") {
  tsyn_experiment* exp = reinterpret_cast<tsyn_experiment*>(1);
  CHECK(tsyn_experiment_load(nullptr, &exp) == TSYN_INVALID_ARGUMENT);
  CHECK(tsyn_experiment_load(kR2.c_str(), nullptr) == TSYN_INVALID_ARGUMENT);
  CHECK(tsyn_decompose(nullptr) == TSYN_INVALID_ARGUMENT);
  CHECK(tsyn_experiment_set_output_dir(nullptr, "x") == TSYN_INVALID_ARGUMENT);
  CHECK(std::string(tsyn_experiment_output_dir(nullptr)).empty());
  tsyn_experiment_free(nullptr);
}

TEST_CASE("load failure leaves no handle") {
  tsyn_experiment* exp = nullptr;
  CHECK(tsyn_experiment_load("/nonexistent/config.json", &exp) == TSYN_CONFIG_ERROR);
  CHECK(exp == nullptr);
  CHECK(std::string(tsyn_last_error()).find("config.json") != std::string::npos);
}

TEST_CASE("decompose and synth through the handle") {
  tsyn_experiment* exp = nullptr;
  REQUIRE(tsyn_experiment_load(kR2.c_str(), &exp) == TSYN_OK);
  const fs::path out = scratch("tubesynth_capi_synth");
  CHECK(tsyn_experiment_set_output_dir(exp, out.c_str()) == TSYN_OK);
  CHECK(std::string(tsyn_experiment_output_dir(exp)) == out.string());

  CHECK(tsyn_decompose(exp) == TSYN_OK);
  CHECK(std::string(tsyn_experiment_summary(exp)).find("q1,q0,q1") != std::string::npos);
  CHECK(std::string(tsyn_experiment_last_error(exp)).empty());

  CHECK(tsyn_synth(exp) == TSYN_OK);
  CHECK(fs::exists(out / "synth_report.json"));
  CHECK(fs::exists(out / "tube_1.csv"));

  // No trace has been written to this directory yet.
  CHECK(tsyn_verify(exp) == TSYN_CONFIG_ERROR);
  CHECK(std::string(tsyn_experiment_last_error(exp)).size() > 0);
  tsyn_experiment_free(exp);
  fs::remove_all(out);
}

TEST_CASE("output directory falls back to the environment") {
  const fs::path env_dir = scratch("tubesynth_capi_env");
  ::setenv("TUBESYNTH_OUT", env_dir.c_str(), 1);
  tsyn_experiment* exp = nullptr;
  REQUIRE(tsyn_experiment_load(kR2.c_str(), &exp) == TSYN_OK);
  CHECK(std::string(tsyn_experiment_output_dir(exp)) == env_dir.string());
  tsyn_experiment_free(exp);
  ::unsetenv("TUBESYNTH_OUT");
  REQUIRE(tsyn_experiment_load(kR2.c_str(), &exp) == TSYN_OK);
  CHECK(std::string(tsyn_experiment_output_dir(exp)) == "tubesynth_out");
  tsyn_experiment_free(exp);
}
