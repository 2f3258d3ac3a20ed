#include <gtest/gtest.h>

#include <random>

#include "feqtee/tee.hpp"

using namespace feqtee;
using K = TeeInstruction::Kind;

namespace {

TeeProgram random_program(std::mt19937_64& rng) {
  TeeProgram p;
  std::vector<int> tags;
  std::uniform_int_distribution<int> id(0, 20000), len(1, 30), kind(0, 3);
  p.instructions.push_back(TeeInstruction::apply(id(rng)));
  const int n = len(rng);
  while (static_cast<int>(p.size()) < n) {
    switch (kind(rng)) {
      case 0: p.instructions.push_back(TeeInstruction::apply(id(rng))); break;
      case 1: {
        const int t = id(rng) % 50;
        tags.push_back(t);
        p.instructions.push_back(TeeInstruction::remember(t));
        break;
      }
      case 2:
        if (!tags.empty()) p.instructions.push_back(TeeInstruction::get_previous(tags[id(rng) % tags.size()]));
        break;
      case 3: {
        std::vector<int> ids(1 + id(rng) % 12);
        for (int& v : ids) v = id(rng) % 4225;
        p.instructions.push_back(TeeInstruction::select(ids));
        break;
      }
    }
  }
  return p;
}

}  // namespace

TEST(Tee, ReferenceProgramParsesAndRoundTrips) {
  const std::string text = "E8124 E8124 E17698 E15286 E4630 P4 Re gp P4 sv 2222 2402 2562 2742";
  const TeeProgram p = parse_tee(text);
  const std::vector<TeeInstruction> expected{
      TeeInstruction::apply(8124),  TeeInstruction::apply(8124),    TeeInstruction::apply(17698),
      TeeInstruction::apply(15286), TeeInstruction::apply(4630),    TeeInstruction::remember(4),
      TeeInstruction::get_previous(4), TeeInstruction::select({2222, 2402, 2562, 2742})};
  EXPECT_EQ(p.instructions, expected);
  EXPECT_EQ(serialize_tee(p), text);
}

TEST(Tee, SmallPrograms) {
  EXPECT_EQ(parse_tee("E1").instructions, std::vector<TeeInstruction>{TeeInstruction::apply(1)});
  EXPECT_EQ(serialize_tee(TeeProgram{{TeeInstruction::apply(1)}}), "E1");
  EXPECT_EQ(serialize_tee(parse_tee("E1 P0 Re gp P0 sv 0")), "E1 P0 Re gp P0 sv 0");
  EXPECT_EQ(serialize_tee(parse_tee("  E1\n\tE2  ")), "E1 E2");
  EXPECT_EQ(serialize_tee(parse_tee("E007")), "E7");
  EXPECT_TRUE(parse_tee("").empty());
}

TEST(Tee, ErrorsCarryKindAndOffset) {
  auto expect_error = [](const std::string& text, ErrorKind kind, std::size_t offset) {
    try {
      parse_tee(text);
      ADD_FAILURE() << "no error for '" << text << "'";
    } catch (const Error& e) {
      EXPECT_EQ(e.kind(), kind) << text;
      EXPECT_EQ(e.position(), offset) << text;
    }
  };
  expect_error("gp P9", ErrorKind::Semantic, 3);
  expect_error("P1 Re E1", ErrorKind::Semantic, 0);
  expect_error("E1 gp P9", ErrorKind::Semantic, 6);  // unknown tag
  expect_error("E1 gp", ErrorKind::Syntax, 3);
  expect_error("E1 gp E2", ErrorKind::Syntax, 3);
  expect_error("E1 sv", ErrorKind::Syntax, 3);
  expect_error("E1 sv E2", ErrorKind::Syntax, 3);
  expect_error("E1 X", ErrorKind::Syntax, 3);
  expect_error("E1 P3", ErrorKind::Syntax, 3);
  expect_error("E1 P3 E2", ErrorKind::Syntax, 3);
  expect_error("E1 Re", ErrorKind::Syntax, 3);
  expect_error("E1 12", ErrorKind::Syntax, 3);
  expect_error("E99999999999", ErrorKind::Syntax, 0);
  expect_error("E1 sv 4 5x", ErrorKind::Syntax, 8);
  expect_error("E-1", ErrorKind::Syntax, 0);
}

TEST(Tee, LenientModeTruncatesAtTheFirstError) {
  EXPECT_EQ(serialize_tee(parse_tee("E1 E2 bogus E3", ParseMode::Lenient)), "E1 E2");
  EXPECT_EQ(serialize_tee(parse_tee("E1 gp P7 E3", ParseMode::Lenient)), "E1");
  EXPECT_EQ(serialize_tee(parse_tee("E1 P2 Re gp P2 sv", ParseMode::Lenient)), "E1 P2 Re gp P2");
  EXPECT_TRUE(parse_tee("sv 1 2", ParseMode::Lenient).empty());
}

TEST(Tee, RandomProgramsRoundTrip) {
  std::mt19937_64 rng(11);
  for (int i = 0; i < 300; ++i) {
    const TeeProgram p = random_program(rng);
    const std::string text = serialize_tee(p);
    const TeeProgram q = parse_tee(text);
    ASSERT_EQ(p, q) << text;
    ASSERT_EQ(serialize_tee(q), text);
  }
}

TEST(Tee, ArbitraryBytesNeverCrash) {
  std::mt19937_64 rng(5);
  const std::string alphabet = "EPRegpsv0123456789 \n\t\x01\xff";
  for (int i = 0; i < 3000; ++i) {
    std::string s(rng() % 64, '\0');
    for (char& c : s) c = (rng() % 3 == 0) ? static_cast<char>(rng() & 0xff) : alphabet[rng() % alphabet.size()];
    for (auto mode : {ParseMode::Strict, ParseMode::Lenient}) {
      try {
        const TeeProgram p = parse_tee(s, mode);
        EXPECT_EQ(parse_tee(serialize_tee(p)), p);
      } catch (const Error& e) {
        EXPECT_TRUE(e.kind() == ErrorKind::Syntax || e.kind() == ErrorKind::Semantic);
        EXPECT_LE(e.position(), s.size());
        EXPECT_EQ(mode, ParseMode::Strict);
      }
    }
  }
}
