#include <gtest/gtest.h>

#include <filesystem>

#include "oracle.hpp"
#include "schro/error.hpp"
#include "schro/serialize.hpp"

using namespace schro;
using nlohmann::json;

namespace {

FilterParams sample_params() {
  std::mt19937_64 rng(1);
  FilterParams p;
  for (int m = 0; m < 2; ++m) {
    CMatrix w(2, 3);
    for (Eigen::Index c = 0; c < 3; ++c) w.col(c) = oracle::random_unit(rng, 2);
    p.terms.push_back({0.1 + m, -0.3 * m, oracle::random_real(rng, 2), w});
  }
  return p;
}

}  // namespace

TEST(Serialize, FilterParamsRoundTrip) {
  const FilterParams p = sample_params();
  const FilterParams back = filter_params_from_json(json::parse(to_json(p).dump()));
  ASSERT_EQ(back.n_terms(), 2u);
  for (std::size_t m = 0; m < 2; ++m) {
    EXPECT_EQ(back.terms[m].t, p.terms[m].t);
    EXPECT_EQ(back.terms[m].theta, p.terms[m].theta);
    EXPECT_EQ(back.terms[m].direction, p.terms[m].direction);
    EXPECT_EQ(back.terms[m].mix, p.terms[m].mix);
  }
  const auto path = std::filesystem::temp_directory_path() / "schro_test_params.json";
  save_filter_params(p, path);
  EXPECT_EQ(load_filter_params(path).terms[1].mix, p.terms[1].mix);
}

TEST(Serialize, FilterParamsMixIsRowsOfPairs) {
  const json j = to_json(sample_params());
  const auto& mix = j["terms"][0]["mix"];
  ASSERT_EQ(mix.size(), 2u);     // J rows
  ASSERT_EQ(mix[0].size(), 3u);  // D columns
  ASSERT_EQ(mix[0][0].size(), 2u);
}

TEST(Serialize, FilterParamsStrict) {
  json j = to_json(sample_params());
  j["terms"][0]["bias"] = 1.0;
  EXPECT_THROW(filter_params_from_json(j), Error);
  json k = to_json(sample_params());
  k["terms"][0].erase("theta");
  EXPECT_THROW(filter_params_from_json(k), Error);
  json s = to_json(sample_params());
  s["terms"][1]["direction"] = json::array({1.0});
  EXPECT_THROW(filter_params_from_json(s), Error);
  try {
    load_filter_params("/nonexistent/params.json");
    FAIL();
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find("/nonexistent/params.json"), std::string::npos);
  }
}

TEST(Serialize, RoutingReportHasAllFields) {
  const json j = to_json(RoutingReport{1.5, 1.0, 0.2, -0.5, 0.3});
  for (const char* key : {"measure", "target", "initial_variance", "final_mean", "final_variance"}) {
    EXPECT_TRUE(j.contains(key)) << key;
  }
  EXPECT_EQ(j["measure"], 1.5);
}

TEST(Serialize, PMOResultLayout) {
  PMOResult r;
  r.transform = (RMatrix(2, 2) << 1, 2, 3, 4).finished();
  r.objective_trace = {{0, 5.0}, {1, 4.0}};
  const json j = to_json(r);
  EXPECT_EQ(j["transform"], json::parse("[[1.0,2.0],[3.0,4.0]]"));
  EXPECT_EQ(j["objective_trace"], json::parse("[[0,5.0],[1,4.0]]"));
  EXPECT_EQ(matrix_from_json(j["transform"]), r.transform);
}
