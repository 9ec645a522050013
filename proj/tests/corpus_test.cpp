#include <map>
#include <set>
#include <sstream>

#include <gtest/gtest.h>

#include "dialweight/corpus.hpp"
#include "dialweight/error.hpp"
#include "dialweight/preprocess.hpp"

namespace dialweight {
namespace {

Utterance utt(std::vector<std::string> tokens, std::optional<std::string> speaker = std::nullopt,
              std::optional<std::int64_t> start = std::nullopt,
              std::optional<std::int64_t> end = std::nullopt) {
  Utterance u;
  u.tokens = std::move(tokens);
  u.speaker = std::move(speaker);
  u.start_ms = start;
  u.end_ms = end;
  return u;
}

TEST(ParseDialogues, EmptyInput) {
  std::istringstream in("");
  EXPECT_TRUE(read_dialogues(in).empty());
}

TEST(ParseDialogues, OneRecordTwoUtterances) {
  std::istringstream in(
      R"({"id":"d1","metadata":{"genre":"drama"},"utterances":[)"
      R"({"tokens":["Frank",",","hi"],"speaker":"DANA","start_ms":0,"end_ms":900,"entities":[[0,1,"PERSON"]]},)"
      R"({"tokens":["hello"],"speaker":"FRANK","start_ms":1000,"end_ms":1500}]})"
      "\n\n");
  auto ds = read_dialogues(in);
  ASSERT_EQ(ds.size(), 1u);
  EXPECT_EQ(ds[0].id, "d1");
  ASSERT_EQ(ds[0].utterances.size(), 2u);
  EXPECT_EQ(ds[0].utterances[0].entities.size(), 1u);
  EXPECT_EQ(ds[0].utterances[0].entities[0].cls, EntityClass::person);
  EXPECT_EQ(*ds[0].utterances[1].speaker, "FRANK");
  EXPECT_EQ(ds[0].metadata["genre"], "drama");
}

TEST(ParseDialogues, EndBeforeStartIsSchemaError) {
  std::istringstream in(R"({"id":"x","utterances":[{"tokens":["a"],"start_ms":500,"end_ms":100}]})");
  EXPECT_THROW(read_dialogues(in), SchemaError);
}

TEST(ParseDialogues, ErrorsCarryLineNumbers) {
  std::istringstream bad_json(R"({"id":"a","utterances":[]})"
                              "\n{not json\n");
  try {
    read_dialogues(bad_json);
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 2u);
  }
  std::istringstream missing(R"({"utterances":[]})");
  try {
    read_dialogues(missing);
    FAIL();
  } catch (const SchemaError& e) {
    EXPECT_EQ(e.line(), 1u);
    EXPECT_NE(std::string(e.what()).find("'id'"), std::string::npos);
  }
}

TEST(ParseDialogues, RejectsBadSpans) {
  std::istringstream out_of_range(R"({"id":"x","utterances":[{"tokens":["a"],"entities":[[0,2,"PERSON"]]}]})");
  EXPECT_THROW(read_dialogues(out_of_range), SchemaError);
  std::istringstream overlap(
      R"({"id":"x","utterances":[{"tokens":["a","b","c"],"entities":[[0,2,"PERSON"],[1,3,"NUMBER"]]}]})");
  EXPECT_THROW(read_dialogues(overlap), SchemaError);
  std::istringstream bad_class(R"({"id":"x","utterances":[{"tokens":["a"],"entities":[[0,1,"ORG"]]}]})");
  EXPECT_THROW(read_dialogues(bad_class), SchemaError);
}

TEST(ParseDialogues, RoundTripThroughWriter) {
  Dialogue d;
  d.id = "r";
  d.metadata = {{"cast", {"Dana"}}};
  d.utterances = {utt({"a", "b"}, "X", 0, 10), utt({"c"})};
  d.utterances[0].entities.push_back({1, 2, EntityClass::location});
  std::stringstream ss;
  write_dialogues(ss, {d});
  auto back = read_dialogues(ss);
  ASSERT_EQ(back.size(), 1u);
  EXPECT_EQ(back[0].utterances, d.utterances);
  EXPECT_EQ(back[0].metadata, d.metadata);
}

Dialogue timed(const std::vector<std::int64_t>& gaps) {
  Dialogue d;
  d.id = "t";
  std::int64_t t = 0;
  d.utterances.push_back(utt({"u0"}, "A", t, t + 1000));
  t += 1000;
  for (std::size_t i = 0; i < gaps.size(); ++i) {
    t += gaps[i];
    d.utterances.push_back(utt({"u" + std::to_string(i + 1)}, "A", t, t + 1000));
    t += 1000;
  }
  return d;
}

TEST(Segment, ZeroGapsSingleSegment) {
  auto s = segment_subdialogues(timed({0, 0, 0}), 10000);
  EXPECT_FALSE(s.timestamps_missing);
  ASSERT_EQ(s.segments.size(), 1u);
  EXPECT_EQ(s.segments[0].utterances.size(), 4u);
}

TEST(Segment, BoundaryGap) {
  auto s = segment_subdialogues(timed({10000, 10001}), 10000);
  ASSERT_EQ(s.segments.size(), 2u);
  EXPECT_EQ(s.segments[0].utterances.size(), 2u);
  EXPECT_EQ(s.segments[1].utterances.size(), 1u);
  EXPECT_EQ(s.segments[1].id, "t#1");
}

TEST(Segment, PlantedGapsGiveKPlusOneSegments) {
  Rng rng(12);
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t n = 2 + rng.below(40);
    std::vector<std::int64_t> gaps(n - 1);
    std::size_t planted = 0;
    for (auto& g : gaps) {
      if (rng.bernoulli(0.2)) {
        g = 10001 + static_cast<std::int64_t>(rng.below(50000));
        ++planted;
      } else {
        g = static_cast<std::int64_t>(rng.below(10001));
      }
    }
    const Dialogue d = timed(gaps);
    auto s = segment_subdialogues(d, 10000);
    EXPECT_EQ(s.segments.size(), planted + 1);
    std::vector<Utterance> joined;
    for (const auto& seg : s.segments) {
      EXPECT_FALSE(seg.utterances.empty());
      joined.insert(joined.end(), seg.utterances.begin(), seg.utterances.end());
    }
    EXPECT_EQ(joined, d.utterances);
  }
}

TEST(Segment, MissingTimestampsReturnsInputFlagged) {
  Dialogue d = timed({20000});
  d.utterances[1].start_ms.reset();
  auto s = segment_subdialogues(d, 10000);
  EXPECT_TRUE(s.timestamps_missing);
  ASSERT_EQ(s.segments.size(), 1u);
  EXPECT_EQ(s.segments[0].utterances, d.utterances);
}

TEST(ExtractPairs, Counts) {
  Dialogue d;
  d.id = "x";
  d.utterances = {utt({"a"})};
  EXPECT_TRUE(extract_pairs(d).empty());
  d.utterances.push_back(utt({"b"}));
  EXPECT_EQ(extract_pairs(d).size(), 1u);
  for (std::size_t n = 2; n < 15; ++n) {
    d.utterances.resize(n, utt({"z"}));
    EXPECT_EQ(extract_pairs(d).size(), n - 1);
  }
}

TEST(ExtractPairs, GapWindowAndTurnMode) {
  Dialogue d;
  d.id = "x";
  d.utterances = {utt({"a"}, "A", 0, 100), utt({"b"}, "A", 150, 300), utt({"c"}, "B", 700, 900),
                  utt({"d"}, "B", 900, 1000), utt({"e"}, "A", 1200, 1300)};
  auto pairs = extract_pairs(d, {.mode = PairMode::utterance, .context_window = 2});
  ASSERT_EQ(pairs.size(), 4u);
  EXPECT_EQ(*pairs[1].gap_ms, 400);
  EXPECT_EQ(pairs[3].context.size(), 2u);
  EXPECT_EQ(pairs[3].context[0].tokens[0], "c");
  EXPECT_EQ(*pairs[0].source_speakers, 2u);

  auto turns = extract_pairs(d, {.mode = PairMode::turn});
  ASSERT_EQ(turns.size(), 2u);
  EXPECT_EQ(turns[0].context.size(), 2u);
  EXPECT_EQ(turns[0].response.size(), 2u);
  EXPECT_EQ(turns[1].response.size(), 1u);
  EXPECT_EQ(*turns[1].gap_ms, 200);
}

TEST(ExtractPairs, DocumentFeatures) {
  Dialogue d;
  d.id = "x";
  d.metadata = {{"genre", "comedy"}, {"duration_ms", 1200000}};
  d.utterances = {utt({"a"}), utt({"b"})};
  auto pairs = extract_pairs(d, {.genres = {"drama", "comedy"}, .duration_feature = true});
  ASSERT_EQ(pairs.size(), 1u);
  EXPECT_EQ(pairs[0].extra_features, (std::vector<double>{0.0, 1.0, 2.0}));
}

class SelectorTest : public ::testing::Test {
 protected:
  void SetUp() override { vocab = build_vocabulary(std::vector<std::string>{"do", "you", "know", "yes", "no", "?", "."}); }

  DialoguePair pair(std::vector<std::string> ctx, std::string ctx_speaker, std::vector<std::string> rsp,
                    std::string rsp_speaker, std::size_t speakers = 2) {
    DialoguePair p;
    p.context = {utt(std::move(ctx), ctx_speaker)};
    p.response = {utt(std::move(rsp), rsp_speaker)};
    p.source_id = "s";
    p.source_speakers = speakers;
    return p;
  }

  Vocabulary vocab;
  CastLists cast{{"s", {"dana", "miss barrett"}}};
};

TEST_F(SelectorTest, Heuristics) {
  auto good = pair({"do", "you", "know", "?"}, "A", {"yes", "."}, "B");
  EXPECT_FALSE(quality_violation(good, vocab, cast["s"]));

  auto same_speaker = pair({"do", "you", "know", "?"}, "A", {"yes", "."}, "A");
  EXPECT_EQ(*quality_violation(same_speaker, vocab, cast["s"]), "no speaker change");

  auto three = pair({"do", "?"}, "A", {"yes"}, "B", 3);
  EXPECT_TRUE(quality_violation(three, vocab, cast["s"]));

  auto name = pair({"do", "you", "know", "?"}, "A", {"yes", "DANA", "."}, "B");
  EXPECT_NE(quality_violation(name, vocab, cast["s"])->find("character name"), std::string::npos);

  auto multiword = pair({"do", "you", "know", "?"}, "A", {"no", "Miss", "Barrett"}, "B");
  EXPECT_TRUE(quality_violation(multiword, vocab, cast["s"]));

  auto oov = pair({"do", "you", "know", "?"}, "A", {"yes", "zebra"}, "B");
  EXPECT_NE(quality_violation(oov, vocab, cast["s"])->find("out-of-vocabulary"), std::string::npos);

  // OOV inside an entity span is fine (it becomes a tag)
  auto span = oov;
  span.response[0].entities.push_back({1, 2, EntityClass::location});
  EXPECT_FALSE(quality_violation(span, vocab, cast["s"]));

  auto unannotated = good;
  unannotated.response[0].speaker.reset();
  EXPECT_TRUE(quality_violation(unannotated, vocab, cast["s"]));
}

TEST_F(SelectorTest, SubsetAndIdempotent) {
  std::vector<DialoguePair> pairs = {
      pair({"do", "?"}, "A", {"yes"}, "B"), pair({"do", "?"}, "A", {"yes"}, "A"),
      pair({"do", "?"}, "A", {"dana"}, "B"), pair({"know", "?"}, "B", {"no", "."}, "A")};
  auto once = select_high_quality(pairs, vocab, cast);
  ASSERT_EQ(once.size(), 2u);
  EXPECT_EQ(once[0].context[0].tokens, pairs[0].context[0].tokens);
  EXPECT_EQ(once[1].response[0].tokens, pairs[3].response[0].tokens);
  auto twice = select_high_quality(once, vocab, cast);
  ASSERT_EQ(twice.size(), once.size());
  for (std::size_t i = 0; i < once.size(); ++i) EXPECT_TRUE(same_tokens(twice[i].response, once[i].response));
}

std::vector<DialoguePair> numbered_pairs(std::size_t n) {
  std::vector<DialoguePair> pairs;
  for (std::size_t i = 0; i < n; ++i) {
    DialoguePair p;
    p.context = {utt({"c" + std::to_string(i)})};
    p.response = {utt({"r" + std::to_string(i)})};
    p.source_id = "s";
    p.gap_ms = static_cast<std::int64_t>(i);
    pairs.push_back(std::move(p));
  }
  return pairs;
}

TEST(SampleNegatives, TwoPairsRatioOne) {
  auto pairs = numbered_pairs(2);
  pairs[0].weight = 0.25;
  Rng rng(1);
  auto out = sample_negatives(pairs, 1, rng);
  ASSERT_EQ(out.size(), 4u);
  EXPECT_EQ(*out[0].label, 1);
  EXPECT_EQ(*out[1].label, 0);
  EXPECT_EQ(out[1].response[0].tokens[0], "r1");
  EXPECT_EQ(out[1].context[0].tokens[0], "c0");
  EXPECT_EQ(*out[1].gap_ms, 1);
  EXPECT_EQ(*out[1].weight, 0.25);
  EXPECT_EQ(out[3].response[0].tokens[0], "r0");
}

TEST(SampleNegatives, PoolOfOneIsError) {
  Rng rng(1);
  EXPECT_THROW(sample_negatives(numbered_pairs(1), 1, rng), DataError);
}

TEST(SampleNegatives, NeverTheTrueResponseEvenWithDuplicates) {
  auto pairs = numbered_pairs(6);
  for (std::size_t i = 0; i < 5; ++i) pairs[i].response = {utt({"same"})};
  Rng rng(4);
  auto out = sample_negatives(pairs, 3, rng);
  for (std::size_t i = 0; i < out.size(); ++i) {
    if (*out[i].label == 0) {
      const auto& pos = out[i - (i % 4)];
      EXPECT_FALSE(same_tokens(out[i].response, pos.response));
    }
  }
  std::vector<DialoguePair> all_same = {pairs[0], pairs[1]};
  EXPECT_THROW(sample_negatives(all_same, 1, rng), DataError);
}

TEST(SampleNegatives, UniformOverOtherResponses) {
  // Chi-squared sanity check on which pool index each negative came from.
  const std::size_t n = 10000;
  const std::size_t buckets = 20;
  auto pairs = numbered_pairs(n);
  Rng rng(99);
  auto out = sample_negatives(pairs, 1, rng);
  std::vector<double> counts(buckets, 0.0);
  for (const auto& p : out) {
    if (*p.label == 0) counts[static_cast<std::size_t>(*p.gap_ms) * buckets / n] += 1.0;
  }
  const double expected = static_cast<double>(n) / buckets;
  double chi2 = 0.0;
  for (double c : counts) chi2 += (c - expected) * (c - expected) / expected;
  // 19 degrees of freedom; 43.8 is the 0.999 quantile.
  EXPECT_LT(chi2, 43.8);
}

TEST(SampleNegatives, SeededDeterminism) {
  auto pairs = numbered_pairs(50);
  Rng a(5), b(5);
  auto x = sample_negatives(pairs, 2, a);
  auto y = sample_negatives(pairs, 2, b);
  ASSERT_EQ(x.size(), y.size());
  for (std::size_t i = 0; i < x.size(); ++i) EXPECT_TRUE(same_tokens(x[i].response, y[i].response));
}

TEST(PairJsonl, RoundTrip) {
  auto pairs = numbered_pairs(3);
  pairs[0].label = 1;
  pairs[1].weight = 0.5;
  pairs[2].extra_features = {0.5, 1.0};
  pairs[2].context[0].speaker = "A";
  std::stringstream ss;
  write_pairs(ss, pairs);
  auto back = read_pairs(ss);
  ASSERT_EQ(back.size(), 3u);
  EXPECT_EQ(*back[0].label, 1);
  EXPECT_EQ(*back[1].weight, 0.5);
  EXPECT_EQ(back[2].extra_features, pairs[2].extra_features);
  EXPECT_EQ(*back[2].context[0].speaker, "A");
  EXPECT_EQ(*back[2].gap_ms, 2);
}

TEST(PairJsonl, RejectsBadWeightAndLabel) {
  std::istringstream w(R"({"context":[["a"]],"response":[["b"]],"source_id":"s","weight":0})");
  EXPECT_THROW(read_pairs(w), SchemaError);
  std::istringstream l(R"({"context":[["a"]],"response":[["b"]],"source_id":"s","label":2})");
  EXPECT_THROW(read_pairs(l), SchemaError);
  std::istringstream e(R"({"context":[],"response":[["b"]],"source_id":"s"})");
  EXPECT_THROW(read_pairs(e), SchemaError);
}

}  // namespace
}  // namespace dialweight
