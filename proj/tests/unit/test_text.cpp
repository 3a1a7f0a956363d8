#include <gtest/gtest.h>

#include "cone/text.hpp"

using namespace cone::text;

TEST(Text, NormalizeWhitespaceCollapsesAndTrims) {
  EXPECT_EQ(normalize_whitespace("  a \t b\n\nc  "), "a b c");
  EXPECT_EQ(normalize_whitespace(""), "");
  EXPECT_EQ(normalize_whitespace(" \n "), "");
}

TEST(Text, TokenizeLowercasesAndSplitsOnPunctuation) {
  EXPECT_EQ(tokenize("Snake-plants, TOLERATE drought!"),
            (std::vector<std::string>{"snake", "plants", "tolerate", "drought"}));
  EXPECT_EQ(tokenize("caf\xc3\xa9 au lait"), (std::vector<std::string>{"caf\xc3\xa9", "au", "lait"}));
  EXPECT_TRUE(tokenize("...").empty());
}

TEST(Text, WordCount) {
  EXPECT_EQ(word_count("one two  three"), 3u);
  EXPECT_EQ(word_count(""), 0u);
}

TEST(Text, SplitSentencesOnTerminalPunctuation) {
  EXPECT_EQ(split_sentences("Snake plants tolerate drought. They need little water."),
            (std::vector<std::string>{"Snake plants tolerate drought.", "They need little water."}));
  EXPECT_EQ(split_sentences("Really?! Yes.  No"), (std::vector<std::string>{"Really?!", "Yes.", "No"}));
  EXPECT_EQ(split_sentences("Version 2.5 ships"), (std::vector<std::string>{"Version 2.5 ships"}));
  EXPECT_TRUE(split_sentences("   ").empty());
}

TEST(Text, SplitLinesDropsCarriageReturns) {
  EXPECT_EQ(split_lines("a\r\nb\n\nc"), (std::vector<std::string>{"a", "b", "", "c"}));
}

TEST(Text, NormalizedTextMapsBackToSource) {
  const std::string src = "  the   cat\tsat ";
  const auto n = normalize_with_offsets(src);
  EXPECT_EQ(n.text, "the cat sat");
  ASSERT_EQ(n.origin.size(), n.text.size());
  for (std::size_t i = 0; i < n.text.size(); ++i) {
    if (n.text[i] != ' ') {
      EXPECT_EQ(src[n.origin[i]], n.text[i]);
    }
  }
}
