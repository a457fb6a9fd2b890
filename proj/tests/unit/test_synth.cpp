#include <algorithm>
#include <sstream>

#include <gtest/gtest.h>

#include "enfuse/error.hpp"
#include "enfuse/regression.hpp"
#include "enfuse/synth.hpp"
#include "support.hpp"

using namespace enfuse;
using namespace enfuse::synth;

TEST(Synth, ColumnCount) {
  const auto data = generate(SynthSpec{});
  const auto csv = to_csv(data);
  const auto header = csv.substr(0, csv.find('\n'));
  EXPECT_EQ(std::count(header.begin(), header.end(), ','), 25);
  EXPECT_EQ(data.informative.size(), 5u);
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 201);
}

TEST(Synth, NoiselessTrueSubsetIsExact) {
  SynthSpec spec;
  spec.noise_sigma = 0.0;
  spec.seed = 4;
  const auto data = generate(spec);
  const Eigen::MatrixXd x = enfuse::testing::take_columns(data.x, data.informative);
  const auto m = metrics(x, data.y, fit_ols(x, data.y));
  EXPECT_NEAR(m.r2, 1.0, 1e-12);
}

TEST(Synth, DefaultSignalToNoise) {
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    SynthSpec spec;
    spec.seed = seed;
    const auto data = generate(spec);
    const Eigen::MatrixXd x = enfuse::testing::take_columns(data.x, data.informative);
    EXPECT_GE(metrics(x, data.y, fit_ols(x, data.y)).r2, 0.9) << "seed " << seed;
  }
}

TEST(Synth, SameSeedSameBytes) {
  SynthSpec spec;
  spec.seed = 77;
  EXPECT_EQ(to_csv(generate(spec)), to_csv(generate(spec)));
  SynthSpec other = spec;
  other.seed = 78;
  EXPECT_NE(to_csv(generate(spec)), to_csv(generate(other)));
}

TEST(Synth, CoefficientsPlanted) {
  SynthSpec spec;
  spec.seed = 5;
  const auto data = generate(spec);
  for (std::size_t j = 0; j < data.coefficients.size(); ++j) {
    const bool informative =
        std::find(data.informative.begin(), data.informative.end(), static_cast<Index>(j)) != data.informative.end();
    if (informative) {
      EXPECT_GE(std::abs(data.coefficients[j]), spec.coef_min);
      EXPECT_LE(std::abs(data.coefficients[j]), spec.coef_max);
    } else {
      EXPECT_EQ(data.coefficients[j], 0.0);
    }
  }
}

TEST(Synth, SchemaParsesBack) {
  const auto data = generate(SynthSpec{});
  const auto schema = parse_schema(to_schema(data));
  EXPECT_EQ(schema.response, "y");
  EXPECT_EQ(schema.kinds.size(), 26u);
  const auto raw = parse_csv(to_csv(data), schema.kinds, schema.response);
  EXPECT_EQ(raw.rows.size(), 200u);
}

TEST(Synth, Validation) {
  SynthSpec spec;
  spec.n = 20;
  EXPECT_THROW(generate(spec), Error);
  spec = SynthSpec{};
  spec.factor_weight = 0.5;
  EXPECT_THROW(generate(spec), Error);
  spec.factors = 2;
  EXPECT_NO_THROW(generate(spec));
}
