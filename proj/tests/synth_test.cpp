#include <map>
#include <set>
#include <sstream>

#include <gtest/gtest.h>

#include "dialweight/config.hpp"
#include "dialweight/error.hpp"
#include "dialweight/pipeline.hpp"
#include "dialweight/synth.hpp"

namespace dialweight {
namespace {

SynthConfig small(std::size_t n) {
  SynthConfig c;
  c.dialogues = n;
  c.validation_dialogues = 5;
  c.test_dialogues = 5;
  return c;
}

TEST(SynthPlan, TenPercentOfTenThousandIsExactlyOneThousand) {
  SynthConfig c;
  c.dialogues = 10000;
  c.high_quality_fraction = 0.1;
  const SynthPlan plan = plan_corpus(c);
  EXPECT_EQ(plan.counts.at(SynthKind::planted), 1000u);
  EXPECT_EQ(plan.total(), 10000u);
}

TEST(SynthPlan, ZeroFractionPlantsNothing) {
  SynthConfig c = small(500);
  c.high_quality_fraction = 0.0;
  const SynthCorpus corpus = generate_corpus(c, 3);
  EXPECT_EQ(corpus.plan.counts.at(SynthKind::planted), 0u);
  for (SynthKind k : corpus.kinds) EXPECT_NE(k, SynthKind::planted);
}

TEST(SynthPlan, NoiseSplitsRoundRobin) {
  SynthConfig c = small(1000);
  c.noise_fraction = 0.3;
  const SynthPlan plan = plan_corpus(c);
  EXPECT_EQ(plan.counts.at(SynthKind::continuation), 100u);
  EXPECT_EQ(plan.counts.at(SynthKind::entity), 100u);
  EXPECT_EQ(plan.counts.at(SynthKind::dull), 100u);
  EXPECT_EQ(plan.counts.at(SynthKind::genuine), 600u);
}

TEST(SynthPlan, RejectsImpossibleFractions) {
  SynthConfig c = small(10);
  c.high_quality_fraction = 0.8;
  c.noise_fraction = 0.3;
  EXPECT_THROW(plan_corpus(c), ConfigError);
  c.noise_fraction = 0.1;
  c.noise_types = {SynthKind::genuine};
  EXPECT_THROW(plan_corpus(c), ConfigError);
}

TEST(SynthCorpus, KindsMatchPlanAndIdsAreUnique) {
  const SynthCorpus corpus = generate_corpus(small(997), 5);
  std::map<SynthKind, std::size_t> seen;
  for (SynthKind k : corpus.kinds) ++seen[k];
  for (const auto& [kind, count] : corpus.plan.counts) EXPECT_EQ(seen[kind], count) << to_string(kind);
  std::set<std::string> ids;
  for (const auto& d : corpus.corpus) ids.insert(d.id);
  EXPECT_EQ(ids.size(), corpus.corpus.size());
  EXPECT_EQ(corpus.validation.size(), 5u);
  EXPECT_EQ(corpus.test.size(), 5u);
}

TEST(SynthCorpus, SameSeedSameBytes) {
  auto dump = [](const SynthCorpus& c) {
    std::ostringstream out;
    write_dialogues(out, c.corpus);
    write_dialogues(out, c.test);
    return out.str();
  };
  EXPECT_EQ(dump(generate_corpus(small(300), 9)), dump(generate_corpus(small(300), 9)));
  EXPECT_NE(dump(generate_corpus(small(300), 9)), dump(generate_corpus(small(300), 10)));
}

TEST(SynthCorpus, SurvivesJsonRoundTrip) {
  const SynthCorpus corpus = generate_corpus(small(50), 2);
  std::stringstream io;
  write_dialogues(io, corpus.corpus);
  const auto back = read_dialogues(io);
  ASSERT_EQ(back.size(), corpus.corpus.size());
  for (std::size_t i = 0; i < back.size(); ++i) EXPECT_EQ(back[i].utterances, corpus.corpus[i].utterances);
}

// The selector's output compared against the generator's ground truth:
// exactly the planted dialogues survive, nothing else does.
TEST(SynthSelection, RecoversExactlyThePlantedSet) {
  SynthConfig c = small(4000);
  const SynthCorpus corpus = generate_corpus(c, 21);
  const PreparedCorpus prepared = prepare_corpus(corpus.corpus, default_config());

  std::set<std::string> planted;
  for (std::size_t i = 0; i < corpus.corpus.size(); ++i) {
    if (corpus.kinds[i] == SynthKind::planted) planted.insert(corpus.corpus[i].id + "#0");
  }
  std::set<std::string> selected;
  for (const auto& p : prepared.high_quality) selected.insert(p.source_id);

  std::size_t true_positives = 0;
  for (const auto& id : selected) true_positives += planted.count(id);
  EXPECT_EQ(selected.size(), prepared.high_quality.size());
  EXPECT_EQ(true_positives, planted.size());
  EXPECT_EQ(selected.size(), planted.size());
  EXPECT_EQ(prepared.manifest["high_quality"], corpus.plan.counts.at(SynthKind::planted));
  EXPECT_EQ(prepared.manifest["dialogues"], c.dialogues);
  EXPECT_EQ(prepared.manifest["pairs"], c.dialogues);
}

TEST(SynthSelection, RejectionCategoriesFollowTheNoiseKinds) {
  const SynthCorpus corpus = generate_corpus(small(3000), 4);
  const PreparedCorpus prepared = prepare_corpus(corpus.corpus, default_config());
  const auto& r = prepared.manifest["rejections"];
  const auto& n = corpus.plan.counts;
  EXPECT_EQ(r["character name"], n.at(SynthKind::entity));
  const std::size_t unannotated = r["missing speaker annotation"].get<std::size_t>();
  const std::size_t same_speaker = r["sub-dialogue has 1 speakers"].get<std::size_t>();
  EXPECT_EQ(unannotated + same_speaker, n.at(SynthKind::genuine) + n.at(SynthKind::dull) + n.at(SynthKind::continuation));
  EXPECT_GT(same_speaker, 0u);
}

TEST(SynthSelection, AnonymizedPairsCarryNoNames) {
  const SynthCorpus corpus = generate_corpus(small(600), 8);
  const PreparedCorpus prepared = prepare_corpus(corpus.corpus, default_config());
  for (const auto& p : prepared.pairs) {
    for (const auto& u : p.response) {
      for (const auto& t : u.tokens) {
        EXPECT_FALSE(!t.empty() && std::isupper(static_cast<unsigned char>(t[0]))) << t;
      }
    }
  }
}

TEST(Config, DefaultsMatchDeskScale) {
  const PipelineConfig c = default_config();
  EXPECT_EQ(c.weighter.model.encoder.hidden_dim, 64u);
  EXPECT_EQ(c.weighter.model.merge_dim, 128u);
  EXPECT_EQ(c.dual_encoder.model.encoder.embedding_dim, 32u);
  EXPECT_EQ(c.dual_encoder.trainer.batch_size, 64u);
  EXPECT_EQ(c.weighter.trainer.patience, 3u);
  EXPECT_DOUBLE_EQ(c.dual_encoder.trainer.optimizer.decay, 0.9);
}

TEST(Config, ParsesEverySection) {
  const PipelineConfig c = parse_config(
      "[corpus]\nmax_gap_ms = 5000\nmode = turn\ngenres = drama, comedy\n"
      "[preprocess]\nvocab_cap = 100\ncontext_tokens = 20\n"
      "[weighter]\nhidden_dim = 400\nepochs = 2\n"
      "[dual_encoder]\nreduction = sum\nuse_weights = false\nbatch_size = 256\n"
      "[eval]\nm = 5\nat = 1,3\n"
      "[synth]\nnoise_types = dull\nnoise_fraction = 0.2\n");
  EXPECT_EQ(c.max_gap_ms, 5000);
  EXPECT_EQ(c.extraction.mode, PairMode::turn);
  EXPECT_EQ(c.extraction.genres, (std::vector<std::string>{"drama", "comedy"}));
  EXPECT_EQ(c.vocab_cap, 100u);
  EXPECT_EQ(c.limits.context_tokens, 20u);
  EXPECT_EQ(c.weighter.model.encoder.hidden_dim, 400u);
  EXPECT_EQ(c.weighter.trainer.epochs, 2u);
  EXPECT_EQ(c.dual_encoder.trainer.loss.reduction, LossReduction::sum);
  EXPECT_FALSE(c.dual_encoder.use_weights);
  EXPECT_EQ(c.dual_encoder.trainer.batch_size, 256u);
  EXPECT_EQ(c.eval.m, 5u);
  EXPECT_EQ(c.eval.at, (std::vector<std::size_t>{1, 3}));
  EXPECT_EQ(c.synth.noise_types, (std::vector<SynthKind>{SynthKind::dull}));
}

TEST(Config, RejectsUnknownKeysAndBadValues) {
  EXPECT_THROW(parse_config("[weighter]\nhiden_dim = 4\n"), ConfigError);
  EXPECT_THROW(parse_config("[nonsense]\nx = 1\n"), ConfigError);
  EXPECT_THROW(parse_config("[weighter]\nhidden_dim = 0\n"), ConfigError);
  EXPECT_THROW(parse_config("[weighter]\nhidden_dim = -3\n"), ConfigError);
  EXPECT_THROW(parse_config("[weighter]\ndropout = 1\n"), ConfigError);
  EXPECT_THROW(parse_config("[weighter]\nlearning_rate = fast\n"), ConfigError);
  EXPECT_THROW(parse_config("[dual_encoder]\nreduction = mean\n"), ConfigError);
  EXPECT_THROW(parse_config("[eval]\nm = 1\n"), ConfigError);
  EXPECT_THROW(parse_config("[eval]\nat = 1,,2\n"), ConfigError);
  EXPECT_THROW(parse_config("stray = 1\n"), ConfigError);
  EXPECT_THROW(parse_config("[corpus\n"), ConfigError);
}

TEST(Config, EmptyTextGivesDefaults) {
  const PipelineConfig c = parse_config("");
  EXPECT_EQ(c.eval.m, default_config().eval.m);
  EXPECT_EQ(c.dual_encoder.trainer.epochs, default_config().dual_encoder.trainer.epochs);
}

}  // namespace
}  // namespace dialweight
