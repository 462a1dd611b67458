#include <gtest/gtest.h>

#include <cstring>
#include <filesystem>
#include <random>
#include <sstream>

#include "harsanyi/axioms.hpp"
#include "harsanyi/table_io.hpp"

using namespace harsanyi;

namespace {

std::string serialize(const TableFile& t) {
  std::stringstream s;
  write_table(s, t);
  return s.str();
}

TableFile parse(const std::string& text) {
  std::stringstream s(text);
  return read_table(s);
}

}  // namespace

TEST(TableIo, RoundTripIsBitExact) {
  std::mt19937_64 rng(1);
  auto v = random_values(10, rng, 1e5);
  v[1] = 1e-310;
  v[2] = -0.0;
  v[3] = 0.1;
  v[4] = 1.0 / 3.0;
  const auto back = parse(serialize({TableKind::kValue, 10, "s1", v}));
  EXPECT_EQ(back.n, 10);
  EXPECT_EQ(back.sample, "s1");
  EXPECT_EQ(back.kind, TableKind::kValue);
  for (std::size_t m = 0; m < v.size(); ++m) {
    EXPECT_EQ(std::memcmp(&back.values[m], &v[m], sizeof(double)), 0) << m;
  }
}

TEST(TableIo, FormatIsReadable) {
  const auto text = serialize({TableKind::kInteraction, 2, "x", {0.0, 1.0, 2.5, -2.0}});
  EXPECT_EQ(text,
            "harsanyi-table v1 kind=interaction n=2 sample=x\n"
            "00 0\n10 1\n01 2.5\n11 -2\n");
}

TEST(TableIo, RowsInAnyOrderCommentsAndBlankLines) {
  const auto t = parse("harsanyi-table v1 kind=value n=2 sample=0\n# note\n\n11 4\n00 1\n01 3\n10 2\n");
  EXPECT_EQ(t.values, (std::vector<double>{1, 2, 3, 4}));
}

TEST(TableIo, MissingMaskIsListed) {
  try {
    parse("harsanyi-table v1 kind=value n=2 sample=0\n00 1\n10 2\n11 4\n");
    FAIL() << "expected FormatError";
  } catch (const FormatError& e) {
    EXPECT_NE(std::string(e.what()).find("01"), std::string::npos) << e.what();
  }
}

TEST(TableIo, Rejections) {
  const std::string head = "harsanyi-table v1 kind=value n=1 sample=0\n";
  EXPECT_THROW(parse(head + "0 1\n0 2\n1 3\n"), FormatError);       // duplicate
  EXPECT_THROW(parse(head + "0 1\n1 abc\n"), FormatError);          // parse failure
  EXPECT_THROW(parse(head + "0 1\n1 nan\n"), FormatError);          // non-finite
  EXPECT_THROW(parse(head + "0 1\n10 2\n"), FormatError);           // wrong width
  EXPECT_THROW(parse("not-a-table\n0 1\n1 2\n"), FormatError);      // header
  EXPECT_THROW(parse("harsanyi-table v1 kind=value n=21 sample=0\n"), Error);
}

TEST(TableIo, InteractionFileReconstructsValues) {
  std::mt19937_64 rng(2);
  const ValueTable v(10, random_values(10, rng));
  const auto dir = std::filesystem::temp_directory_path();
  const auto path = (dir / "harsanyi_test_interactions.txt").string();
  save_interaction_table(path, mobius_transform(v), "k");
  const auto back = zeta_transform(load_interaction_table(path));
  for (Mask t = 0; t < v.size(); ++t) EXPECT_LE(std::abs(back[t] - v[t]), 1e-9 * std::max(1.0, std::abs(v[t])));
  EXPECT_THROW(load_value_table(path), FormatError);  // wrong kind
  std::filesystem::remove(path);
}
