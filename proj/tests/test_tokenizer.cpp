#include <gtest/gtest.h>

#include <algorithm>
#include <map>
#include <random>

#include "qidf/tokenizer.hpp"

using namespace qidf;
using V = std::vector<std::string>;

TEST(Tokenize, T0LowercasesAndDropsStopwords)
{
    EXPECT_EQ(tokenize("handleWebSocketUpgrade auth middleware", TokenizerMode::t0_default),
              (V{"handlewebsocketupgrade", "auth", "middleware"}));
    EXPECT_EQ(tokenize("The cat is on a mat, x = y_2; (foo.bar)", TokenizerMode::t0_default),
              (V{"cat", "mat", "y_2", "foo", "bar"}));
    EXPECT_TRUE(tokenize("", TokenizerMode::t0_default).empty());
    EXPECT_TRUE(tokenize("a b c", TokenizerMode::t0_default).empty());
}

TEST(Tokenize, T0NonAsciiWordCharacters)
{
    EXPECT_EQ(tokenize("café naïve — x", TokenizerMode::t0_default), (V{"café", "naïve"}));
}

TEST(Tokenize, T1WhitespaceOnly)
{
    EXPECT_EQ(tokenize("The  a\tfoo.Bar()\n x", TokenizerMode::t1_whitespace),
              (V{"the", "a", "foo.bar()", "x"}));
    EXPECT_EQ(tokenize("a b　c", TokenizerMode::t1_whitespace), (V{"a", "b", "c"}));
}

TEST(Tokenize, T2EmitsWholeAndParts)
{
    EXPECT_EQ(tokenize("handleWebSocketUpgrade", TokenizerMode::t2_identifier_aware),
              (V{"handlewebsocketupgrade", "handle", "web", "socket", "upgrade"}));
    // A word that does not split is emitted once, not twice.
    EXPECT_EQ(tokenize("auth auth", TokenizerMode::t2_identifier_aware), (V{"auth", "auth"}));
    EXPECT_EQ(tokenize("get_get", TokenizerMode::t2_identifier_aware), (V{"get_get", "get"}));
}

TEST(Tokenize, T3SubTokensOnly)
{
    EXPECT_EQ(tokenize("snake_case_name", TokenizerMode::t3_subtokens_only), (V{"snake", "case", "name"}));
    EXPECT_EQ(tokenize("plain", TokenizerMode::t3_subtokens_only), (V{"plain"}));
}

TEST(SplitIdentifier, Rules)
{
    EXPECT_EQ(split_identifier("handleWebSocketUpgrade"), (V{"handle", "web", "socket", "upgrade"}));
    EXPECT_EQ(split_identifier("snake_case"), (V{"snake", "case"}));
    EXPECT_EQ(split_identifier("HTTPServer2x"), (V{"http", "server", "2", "x"}));
    EXPECT_EQ(split_identifier("HTTPServer"), (V{"http", "server"}));
    EXPECT_EQ(split_identifier("parseJSON"), (V{"parse", "json"}));
    EXPECT_EQ(split_identifier("__init__"), (V{"init"}));
    EXPECT_EQ(split_identifier("v2"), (V{"v", "2"}));
    EXPECT_EQ(split_identifier("ABC"), (V{"abc"}));
}

TEST(Stopwords, ShippedFileMatchesBuiltIn)
{
    auto loaded = load_stopwords(std::string(QIDF_SOURCE_DIR) + "/data/stopwords_en.txt");
    EXPECT_EQ(loaded, default_stopwords());
    EXPECT_EQ(loaded.size(), 33U);
}

TEST(TokenizerMode, NamesRoundTrip)
{
    for (auto m : {TokenizerMode::t0_default, TokenizerMode::t1_whitespace, TokenizerMode::t2_identifier_aware,
                   TokenizerMode::t3_subtokens_only}) {
        EXPECT_EQ(parse_tokenizer_mode(to_string(m)), m);
    }
    EXPECT_THROW(parse_tokenizer_mode("t9"), Error);
}

namespace {

std::string random_code_text(std::mt19937_64& rng)
{
    static const std::vector<std::string> pieces = {
        "get", "Value", "HTTP", "server", "_", "2", "x", "JSONParser", "the", " ", " ", ".", "(", ")", "é", "Data",
        "io", "URL", "a", "snake_case", "\t", "\n", "ID", "9",
    };
    std::uniform_int_distribution<std::size_t> pick(0, pieces.size() - 1);
    std::uniform_int_distribution<int> len(0, 40);
    std::string s;
    for (int i = 0, n = len(rng); i < n; ++i) {
        s += pieces[pick(rng)];
    }
    return s;
}

} // namespace

TEST(TokenizeProperties, T2ContainsT0AsMultiset)
{
    std::mt19937_64 rng(11);
    for (int trial = 0; trial < 500; ++trial) {
        auto text = random_code_text(rng);
        std::map<std::string, int> t2;
        for (const auto& t : tokenize(text, TokenizerMode::t2_identifier_aware)) {
            ++t2[t];
        }
        std::map<std::string, int> t0;
        for (const auto& t : tokenize(text, TokenizerMode::t0_default)) {
            ++t0[t];
        }
        for (const auto& [tok, n] : t0) {
            EXPECT_GE(t2[tok], n) << text;
        }
    }
}

TEST(TokenizeProperties, UnsplittableWordIsItself)
{
    std::mt19937_64 rng(12);
    std::uniform_int_distribution<int> ch('a', 'z');
    std::uniform_int_distribution<int> len(2, 12);
    for (int trial = 0; trial < 300; ++trial) {
        std::string w;
        for (int i = 0, n = len(rng); i < n; ++i) {
            w += static_cast<char>(ch(rng));
        }
        EXPECT_EQ(split_identifier(w), V{w});
        EXPECT_EQ(tokenize(w, TokenizerMode::t2_identifier_aware), tokenize(w, TokenizerMode::t0_default));
    }
}

TEST(TokenizeProperties, TokensHaveNoWhitespaceAndAreDeterministic)
{
    std::mt19937_64 rng(13);
    for (int trial = 0; trial < 300; ++trial) {
        auto text = random_code_text(rng);
        for (auto m : {TokenizerMode::t0_default, TokenizerMode::t1_whitespace, TokenizerMode::t2_identifier_aware,
                       TokenizerMode::t3_subtokens_only}) {
            auto a = tokenize(text, m);
            EXPECT_EQ(a, tokenize(text, m));
            for (const auto& t : a) {
                EXPECT_FALSE(t.empty());
                EXPECT_EQ(t.find_first_of(" \t\n"), std::string::npos);
                EXPECT_FALSE(std::any_of(t.begin(), t.end(), [](char c) { return c >= 'A' && c <= 'Z'; }));
            }
        }
    }
}
