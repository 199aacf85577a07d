#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <sstream>

#include "magsamp/rankme.hpp"
#include "oracles/gram_eigen.hpp"
#include "support/synthetic.hpp"

using namespace magsamp;

using namespace synthetic;

TEST(RankMe, EqualSpectrumGivesItsRank) {
  std::mt19937_64 gen(11);
  for (int r : {1, 5, 10}) {
    auto z = equal_spectrum(200, 64, r, 3.0, gen);
    EXPECT_NEAR(rankme(z, 0.0), r, 1e-9 * r);
    EXPECT_NEAR(rankme(z), equal_spectrum_rankme(r, 64, kDefaultRankMeEpsilon), 1e-9 * r);
  }
}

TEST(RankMe, ScaleAndRotationInvariant) {
  std::mt19937_64 gen(12);
  auto z = gaussian(300, 40, gen);
  const double base = rankme(z);
  EXPECT_NEAR(rankme(z * 17.5), base, 1e-9 * base);
  EXPECT_NEAR(rankme(z * 1e-3), base, 1e-9 * base);
  Eigen::MatrixXd q = orthonormal(40, 40, gen);
  EXPECT_NEAR(rankme(z * q), base, 1e-9 * base);
  Eigen::MatrixXd p = orthonormal(300, 300, gen);
  EXPECT_NEAR(rankme(p * z), base, 1e-9 * base);
}

TEST(RankMe, AgreesWithGramOracle) {
  std::mt19937_64 gen(13);
  std::uniform_int_distribution<int> nd(10, 2000), kd(4, 512);
  for (int trial = 0; trial < 50; ++trial) {
    const int n = nd(gen), k = kd(gen);
    auto z = gaussian(n, k, gen);
    // uneven column scales so the spectrum is not flat
    for (int j = 0; j < k; ++j) z.col(j) *= std::exp(-0.02 * j);
    const double got = rankme(z);
    const double want = oracle::rankme(row_major(z), n, k, kDefaultRankMeEpsilon);
    EXPECT_NEAR(got, want, 1e-6 * want) << n << "x" << k;
    EXPECT_GE(got, 1.0 - 1e-6);
    EXPECT_LE(got, std::min(n, k) * (1.0 + 1e-4));
  }
}

TEST(RankMe, RowPermutationInvariant) {
  std::mt19937_64 gen(14);
  auto z = gaussian(120, 30, gen);
  Eigen::PermutationMatrix<Eigen::Dynamic> perm(120);
  perm.setIdentity();
  std::shuffle(perm.indices().data(), perm.indices().data() + 120, gen);
  EXPECT_NEAR(rankme(perm * z), rankme(z), 1e-10);
}

TEST(RankMe, Errors) {
  EXPECT_THROW(rankme(Eigen::MatrixXd::Zero(5, 4)), DegenerateInputError);
  Eigen::MatrixXd z = Eigen::MatrixXd::Ones(3, 3);
  z(1, 1) = std::nan("");
  EXPECT_THROW(rankme(z), ValidationError);
  EXPECT_THROW(rankme(Eigen::MatrixXd::Ones(3, 3), -1.0), ParameterError);
  EXPECT_THROW(rankme(Eigen::MatrixXd(0, 3)), ValidationError);
}

TEST(RankMeProfile, GroupsByTolerance) {
  std::mt19937_64 gen(15);
  auto set = make_set({{0.5, gaussian(20, 8, gen)}, {0.5 + 5e-7, gaussian(20, 8, gen)}, {1.0, gaussian(30, 8, gen)}});
  auto prof = rankme_profile(set);
  ASSERT_EQ(prof.groups.size(), 2u);
  EXPECT_EQ(prof.groups[0].mpp, 0.5);
  EXPECT_EQ(prof.groups[0].count, 40u);
  EXPECT_EQ(prof.groups[1].count, 30u);
  EXPECT_TRUE(prof.warnings.empty());
  auto fine = rankme_profile(set, kDefaultRankMeEpsilon, 1e-9);
  EXPECT_EQ(fine.groups.size(), 3u);
}

TEST(RankMeProfile, SingletonGroupWarns) {
  std::mt19937_64 gen(16);
  auto set = make_set({{0.25, gaussian(1, 6, gen)}, {2.0, gaussian(10, 6, gen)}});
  auto prof = rankme_profile(set);
  ASSERT_EQ(prof.warnings.size(), 1u);
  EXPECT_NE(prof.warnings[0].find("0.25"), std::string::npos);
}

TEST(RankMeProfile, DuplicateRowsHaveRankOne) {
  Eigen::RowVectorXd v(5);
  v << 1, -2, 0.5, 3, 0.25;
  Eigen::MatrixXd z = v.replicate(12, 1);
  auto prof = rankme_profile(make_set({{1.0, z}}));
  EXPECT_NEAR(prof.groups[0].rankme, 1.0, 1e-5);
}

TEST(RankMeProfile, RecoversPlantedRankOrdering) {
  std::mt19937_64 gen(17);
  const Eigen::Index k = 64;
  auto set = make_set({{0.5, planted_rank(400, k, 10, gen)}, {1.0, planted_rank(400, k, 3, gen)}});
  auto prof = rankme_profile(set);
  ASSERT_EQ(prof.groups.size(), 2u);
  EXPECT_GT(prof.groups[0].rankme, prof.groups[1].rankme);
  EXPECT_NEAR(prof.groups[0].rankme, 10.0, 1.5);
  EXPECT_NEAR(prof.groups[1].rankme, 3.0, 0.5);
}

TEST(RankMeProfile, InputOrderIndependent) {
  std::mt19937_64 gen(18);
  auto set = make_set({{0.5, gaussian(30, 7, gen)}, {1.0, gaussian(30, 7, gen)}, {2.0, gaussian(30, 7, gen)}});
  EmbeddingSet shuffled = set;
  std::vector<std::size_t> order(set.size());
  std::iota(order.begin(), order.end(), 0);
  std::shuffle(order.begin(), order.end(), gen);
  for (std::size_t i = 0; i < order.size(); ++i) {
    shuffled.ids[i] = set.ids[order[i]];
    shuffled.mpps[i] = set.mpps[order[i]];
    shuffled.vectors.row(static_cast<Eigen::Index>(i)) = set.vectors.row(static_cast<Eigen::Index>(order[i]));
  }
  std::ostringstream a, b;
  write_rankme_csv(a, rankme_profile(set));
  write_rankme_csv(b, rankme_profile(shuffled));
  EXPECT_EQ(a.str(), b.str());
}

TEST(CentroidSimilarity, KnownAngles) {
  Eigen::MatrixXd g1(2, 2), g2(2, 2), g3(2, 2);
  g1 << 1, 0, 3, 0;    // centroid (2, 0)
  g2 << 0, 1, 0, 5;    // centroid (0, 3)
  g3 << 1, 1, 2, 2;    // centroid (1.5, 1.5)
  auto m = centroid_similarity(make_set({{0.5, g1}, {1.0, g2}, {2.0, g3}}));
  ASSERT_EQ(m.cosines.rows(), 3);
  EXPECT_DOUBLE_EQ(m.cosines(0, 0), 1.0);
  EXPECT_NEAR(m.cosines(0, 1), 0.0, 1e-15);
  EXPECT_NEAR(m.cosines(0, 2), std::sqrt(0.5), 1e-15);
  EXPECT_NEAR(m.cosines(2, 1), std::sqrt(0.5), 1e-15);
  Eigen::MatrixXd zero(2, 2);
  zero << 1, 1, -1, -1;
  EXPECT_THROW(centroid_similarity(make_set({{0.5, g1}, {1.0, zero}})), DegenerateInputError);
}

TEST(MinMaxNormalize, SharedScale) {
  auto profile = [](double a, double b) {
    RankMeProfile p;
    p.groups = {{0.5, 10, a}, {1.0, 10, b}};
    return p;
  };
  auto out = minmax_normalize_profiles({profile(1, 3), profile(2, 4)});
  EXPECT_NEAR(out[0][0], 0.0, 1e-15);
  EXPECT_NEAR(out[0][1], 2.0 / 3.0, 1e-15);
  EXPECT_NEAR(out[1][0], 1.0 / 3.0, 1e-15);
  EXPECT_NEAR(out[1][1], 1.0, 1e-15);
  EXPECT_THROW(minmax_normalize_profiles({profile(2, 2), profile(2, 2)}), DegenerateInputError);
  EXPECT_THROW(minmax_normalize_profiles({profile(1, 2)}), ParameterError);
  RankMeProfile odd;
  odd.groups = {{0.5, 10, 1.0}};
  EXPECT_THROW(minmax_normalize_profiles({profile(1, 2), odd}), ShapeError);
}

TEST(EmbeddingIo, CsvRoundTrip) {
  std::mt19937_64 gen(19);
  auto set = make_set({{0.25, gaussian(4, 3, gen)}, {1.5, gaussian(3, 3, gen)}});
  std::stringstream ss;
  write_embeddings_csv(ss, set);
  auto back = read_embeddings_csv(ss);
  EXPECT_EQ(back.ids, set.ids);
  EXPECT_EQ(back.mpps, set.mpps);
  EXPECT_EQ(back.vectors, set.vectors);
}

TEST(EmbeddingIo, CsvErrorsCarryLineNumbers) {
  std::istringstream bad("id,mpp,d0,d1\na,0.5,1,2\nb,0.5,1\n");
  try {
    read_embeddings_csv(bad, "emb.csv");
    FAIL() << "expected ParseError";
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 3u);
  }
  std::istringstream header("id,mpp,x0\n");
  EXPECT_THROW(read_embeddings_csv(header), ParseError);
}

TEST(EmbeddingIo, BinaryRoundTripAndLayout) {
  EmbeddingSet set;
  set.ids = {"0", "1"};
  set.mpps = {0.5, 2.0};
  set.vectors.resize(2, 3);
  set.vectors << 1, 2, 3, -0.5, 0.25, 8;
  std::stringstream ss;
  write_embeddings_binary(ss, set);
  const std::string bytes = ss.str();
  ASSERT_EQ(bytes.size(), 4u + 2 + 8 + 4 + 2 * (8 + 3 * 4));
  EXPECT_EQ(bytes.substr(0, 4), "MSEB");
  EXPECT_EQ(bytes[4], 1);
  EXPECT_EQ(bytes[6], 2);
  EXPECT_EQ(bytes[14], 3);
  auto back = read_embeddings_binary(ss);
  EXPECT_EQ(back.mpps, set.mpps);
  EXPECT_EQ(back.vectors, set.vectors);
  std::istringstream truncated(bytes.substr(0, bytes.size() - 2));
  EXPECT_THROW(read_embeddings_binary(truncated), ParseError);
}
