#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <sstream>

#include "larfi/io.hpp"
#include "test_util.hpp"

using namespace larfi;

namespace {

Panel small_panel() {
  Panel p;
  p.covariate_names = {"stress"};
  Subject s1;
  s1.series.y = {0, 1, 1, 0};
  s1.exog = ExogMatrix(4, 1);
  s1.exog << 0.25, -1.5, 0.125, 3.0;
  Subject s2;
  s2.series.y = {1, 0, 1};
  s2.exog = ExogMatrix(3, 1);
  s2.exog << 0.1, 0.2, 0.3;
  p.ids = {"a", "b"};
  p.data.subjects = {s1, s2};
  return p;
}

}  // namespace

TEST_CASE("panel round-trips byte-identically") {
  Panel p = small_panel();
  std::ostringstream out;
  write_panel_csv(out, p);
  std::string first = out.str();

  std::istringstream in(first);
  Panel back = read_panel_csv(in);
  CHECK(back.ids == p.ids);
  CHECK(back.covariate_names == p.covariate_names);
  REQUIRE(back.data.subjects.size() == 2);
  CHECK(back.data.subjects[0].series.y == p.data.subjects[0].series.y);
  CHECK(back.data.subjects[0].exog == p.data.subjects[0].exog);
  CHECK(back.data.subjects[1].series.y == p.data.subjects[1].series.y);

  std::ostringstream out2;
  write_panel_csv(out2, back);
  CHECK(out2.str() == first);
}

TEST_CASE("panel without covariates round-trips") {
  Panel p;
  Subject s;
  s.series.y = {1, 0, 0, 1, 1};
  s.exog = ExogMatrix(0, 0);
  p.ids = {"only"};
  p.data.subjects = {s};
  std::ostringstream out;
  write_panel_csv(out, p);
  CHECK(out.str().rfind("subject,t,y\n", 0) == 0);
  std::istringstream in(out.str());
  Panel back = read_panel_csv(in);
  CHECK(back.covariate_names.empty());
  CHECK(back.data.subjects[0].series.y == s.series.y);
}

TEST_CASE("parse errors carry line numbers") {
  auto fails_with = [](const std::string& text, const std::string& fragment) {
    std::istringstream in(text);
    try {
      read_panel_csv(in);
      FAIL_CHECK("expected parse failure for: " << text);
    } catch (const std::invalid_argument& e) {
      CHECK(std::string(e.what()).find(fragment) != std::string::npos);
    }
  };
  fails_with("t,y\n", "header");
  fails_with("subject,t,y\na,1,2\n", "line 2");
  fails_with("subject,t,y\na,1,1\na,3,0\n", "line 3");
  fails_with("subject,t,y\na,2,1\n", "line 2");
  fails_with("subject,t,y,x\na,1,1,zebra\n", "line 2");
  fails_with("subject,t,y\na,1,1\nb,1,0\na,2,1\n", "line 4");
  fails_with("subject,t,y\na,1,1\na,2\n", "line 3");
}

TEST_CASE("format_double is shortest round-trip") {
  CHECK(format_double(0.25) == "0.25");
  CHECK(format_double(-1.5) == "-1.5");
  CHECK(format_double(0.0) == "0");
  auto rng = larfi::test::test_rng(55);
  for (int i = 0; i < 200; ++i) {
    double v = larfi::test::runif(rng, -1e6, 1e6) * std::pow(10.0, int(larfi::test::runif(rng, -8, 8)));
    CHECK(std::stod(format_double(v)) == v);
  }
}

TEST_CASE("content hash is the 64-bit FNV-1a of the bytes") {
  CHECK(content_hash("") == "cbf29ce484222325");
  CHECK(content_hash("a") == "af63dc4c8601ec8c");
  CHECK(content_hash("ab") != content_hash("ba"));
}

TEST_CASE("manifest embeds config, hash, and version") {
  nlohmann::json cfg{{"T", 50}, {"seed", 9}};
  nlohmann::json m = make_manifest(cfg);
  CHECK(m["config"] == cfg);
  CHECK(m["version"] == std::string(kVersion));
  CHECK(m["config_hash"] == content_hash(cfg.dump()));
  // same config -> same manifest, so reruns are comparable
  CHECK(make_manifest(cfg) == m);
}
