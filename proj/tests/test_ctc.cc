// tests/test_ctc.cc

// Copyright 2026  The rcnnctc Authors

// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// THIS CODE IS PROVIDED *AS IS* BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY
// KIND, EITHER EXPRESS OR IMPLIED, INCLUDING WITHOUT LIMITATION ANY IMPLIED
// WARRANTIES OR CONDITIONS OF TITLE, FITNESS FOR A PARTICULAR PURPOSE,
// MERCHANTABLITY OR NON-INFRINGEMENT.
// See the Apache 2 License for the specific language governing permissions and
// limitations under the License.

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <vector>

#include "doctest.h"
#include "rcnnctc/autodiff.h"
#include "rcnnctc/ctc.h"
#include "rcnnctc/error.h"
#include "rcnnctc/logmath.h"
#include "rcnnctc/rng.h"
#include "rcnnctc/tensor.h"
#include "testutil.h"

using namespace rcnnctc;
using testutil::RandLogProbs;

namespace {

Alphabet AbcAlphabet() {
  Alphabet a;
  a.labels = {"<b>", "_", "A", "B", "C"};
  return a;
}

// Random valid expansion of z: optional blanks between labels and at the
// ends, each label duplicated a random number of times.
CtcPath ExpandLabelSeq(const LabelSeq &z, Rng *rng) {
  CtcPath path;
  auto blanks = [&](int max_run) {
    int n = static_cast<int>(rng->Below(static_cast<uint64_t>(max_run + 1)));
    for (int i = 0; i < n; ++i) path.push_back(Alphabet::kBlankIndex);
  };
  int prev = -1;
  for (int sym : z.symbols) {
    if (sym == prev) {
      // Adjacent repeats need at least one separating blank.
      path.push_back(Alphabet::kBlankIndex);
      blanks(2);
    } else {
      blanks(3);
    }
    int copies = 1 + static_cast<int>(rng->Below(3));
    for (int i = 0; i < copies; ++i) path.push_back(sym);
    prev = sym;
  }
  blanks(3);
  return path;
}

LabelSeq RandLabelSeq(int max_len, int n_labels, Rng *rng) {
  LabelSeq z;
  int len = static_cast<int>(rng->Below(static_cast<uint64_t>(max_len + 1)));
  for (int i = 0; i < len; ++i)
    z.symbols.push_back(1 + static_cast<int>(
                                rng->Below(static_cast<uint64_t>(n_labels - 1))));
  return z;
}

}  // namespace

TEST_CASE("alphabet construction and lookup") {
  Alphabet a = Alphabet::ForCharacters({"ba", "c"});
  REQUIRE(a.Size() == 5);
  CHECK(a.LabelOf(0) == "<b>");
  CHECK(a.LabelOf(1) == "_");
  CHECK(a.LabelOf(2) == "a");
  CHECK(a.LabelOf(3) == "b");
  CHECK(a.LabelOf(4) == "c");
  CHECK(a.IndexOf("c") == 4);
  CHECK(a.IndexOf("z") == -1);
  a.Validate();

  CHECK(AlphabetToString(a) == "_abc");
  Alphabet back = AlphabetFromString("_abc");
  CHECK(back.labels == a.labels);

  Alphabet dup;
  dup.labels = {"<b>", "x", "x"};
  CHECK_THROWS_AS(dup.Validate(), Error);
}

TEST_CASE("collapse merges repeats then deletes blanks") {
  Alphabet a = AbcAlphabet();
  const int A = 2, B = 3, C = 4, BL = 0;

  LabelSeq z1 = CollapsePath({A, A, BL, BL, B, C, BL}, a);
  CHECK(z1.symbols == std::vector<int>({A, B, C}));

  LabelSeq z2 = CollapsePath({BL, A, A, B, BL, C, C}, a);
  CHECK(z2.symbols == std::vector<int>({A, B, C}));

  CHECK(CollapsePath({BL, BL, BL}, a).symbols.empty());
  CHECK(CollapsePath({A, BL, A}, a).symbols ==
        std::vector<int>({A, A}));

  CHECK_THROWS_AS(CollapsePath({A, 9}, a), Error);
}

TEST_CASE("random expansions collapse back to their source") {
  Alphabet a = AbcAlphabet();
  Rng rng(11);
  for (int i = 0; i < 1000; ++i) {
    LabelSeq z = RandLabelSeq(5, a.Size(), &rng);
    CtcPath path = ExpandLabelSeq(z, &rng);
    LabelSeq back = CollapsePath(path, a);
    CHECK(back.symbols == z.symbols);
  }
}

TEST_CASE("label sequence bookkeeping") {
  LabelSeq z{{1, 1, 2}};
  CHECK(z.Length() == 3);
  CHECK(z.AdjacentRepeats() == 1);
  CHECK(z.MinFrames() == 4);
  z.Validate(3);

  LabelSeq blanky{{0, 1}};
  CHECK_THROWS_AS(blanky.Validate(3), Error);
  LabelSeq oob{{5}};
  CHECK_THROWS_AS(oob.Validate(3), Error);
}

TEST_CASE("two-frame uniform distribution gives ln 0.75") {
  Tensor logprobs = Tensor::Full({2, 2}, std::log(0.5));
  LabelSeq z{{1}};
  double got = CtcLogLikelihood(logprobs, z);
  CHECK(got == doctest::Approx(std::log(0.75)).epsilon(1e-12));
  CHECK(BruteForceLogLikelihood(logprobs, z) ==
        doctest::Approx(std::log(0.75)).epsilon(1e-12));
}

TEST_CASE("empty label sequence keeps only the all-blank path") {
  Rng rng(12);
  Tensor logprobs = RandLogProbs(5, 3, &rng);
  double want = 0.0;
  for (int64_t t = 0; t < 5; ++t) want += logprobs.At(t, 0);
  CHECK(CtcLogLikelihood(logprobs, LabelSeq{}) ==
        doctest::Approx(want).epsilon(1e-12));
}

TEST_CASE("inadmissible sequences raise a specific error") {
  Tensor logprobs = Tensor::Full({1, 2}, std::log(0.5));
  LabelSeq z{{1, 1}};
  CHECK_THROWS_WITH_AS(CtcLogLikelihood(logprobs, z),
                       doctest::Contains("too long"), Error);
}

TEST_CASE("dp likelihood matches brute force enumeration") {
  Rng rng(13);
  int done = 0;
  while (done < 200) {
    int n_labels = 2 + static_cast<int>(rng.Below(3));
    int frames = 1 + static_cast<int>(rng.Below(8));
    LabelSeq z = RandLabelSeq(4, n_labels, &rng);
    if (z.MinFrames() > frames) continue;
    Tensor logprobs = RandLogProbs(frames, n_labels, &rng);
    double dp = CtcLogLikelihood(logprobs, z);
    double bf = BruteForceLogLikelihood(logprobs, z);
    CHECK(std::abs(dp - bf) < 1e-8);
    ++done;
  }

  Rng rng2(14);
  Tensor six = RandLogProbs(6, 3, &rng2);
  LabelSeq z2{{1, 2}};
  CHECK(std::abs(CtcLogLikelihood(six, z2) -
                 BruteForceLogLikelihood(six, z2)) < 1e-10);
}

TEST_CASE("brute force partitions unity over all label sequences") {
  Rng rng(15);
  for (int frames = 1; frames <= 4; ++frames) {
    Tensor logprobs = RandLogProbs(frames, 3, &rng);
    double total = 0.0;
    // All sequences over labels {1, 2} up to the frame count, plus empty.
    std::vector<LabelSeq> pending{LabelSeq{}};
    for (int len = 0; len <= frames; ++len) {
      std::vector<LabelSeq> next;
      for (const LabelSeq &z : pending) {
        total += std::exp(BruteForceLogLikelihood(logprobs, z));
        for (int sym = 1; sym <= 2; ++sym) {
          LabelSeq grown = z;
          grown.symbols.push_back(sym);
          if (static_cast<int>(grown.symbols.size()) <= frames)
            next.push_back(grown);
        }
      }
      pending = std::move(next);
    }
    CHECK(std::abs(total - 1.0) < 1e-9);
  }
}

TEST_CASE("brute force rejects blanks and huge state spaces") {
  Tensor logprobs = Tensor::Full({2, 2}, std::log(0.5));
  LabelSeq blanky{{0}};
  CHECK_THROWS_AS(BruteForceLogLikelihood(logprobs, blanky), Error);
  Tensor big = Tensor::Full({30, 4}, std::log(0.25));
  CHECK_THROWS_WITH_AS(BruteForceLogLikelihood(big, LabelSeq{{1}}),
                       doctest::Contains("bound"), Error);
}

TEST_CASE("forward backward agrees with the likelihood at every frame") {
  Rng rng(16);
  for (int rep = 0; rep < 20; ++rep) {
    int n_labels = 2 + static_cast<int>(rng.Below(3));
    int frames = 2 + static_cast<int>(rng.Below(6));
    LabelSeq z = RandLabelSeq(3, n_labels, &rng);
    if (z.MinFrames() > frames) continue;
    Tensor logprobs = RandLogProbs(frames, n_labels, &rng);
    CtcLattice lat = CtcForwardBackward(logprobs, z);
    int states = 2 * z.Length() + 1;
    for (int t = 0; t < frames; ++t) {
      double acc = kLogZero;
      for (int s = 0; s < states; ++s) {
        int label = (s % 2 == 0) ? 0 : z.symbols[(s - 1) / 2];
        double emit = logprobs.At(t, label);
        double term = lat.log_alpha[t][s] + lat.log_beta[t][s] - emit;
        acc = LogAdd(acc, term);
      }
      CHECK(std::abs(acc - lat.log_likelihood) < 1e-8);
    }
  }
}

TEST_CASE("label posteriors are per-frame distributions") {
  Rng rng(17);
  Tensor logprobs = RandLogProbs(6, 4, &rng);
  LabelSeq z{{1, 3}};
  Tensor post = CtcLabelPosteriors(logprobs, z);
  CHECK(post.shape() == logprobs.shape());
  for (int64_t t = 0; t < 6; ++t) {
    double sum = 0.0;
    for (int64_t l = 0; l < 4; ++l) {
      CHECK(post.At(t, l) >= 0.0);
      sum += post.At(t, l);
    }
    CHECK(std::abs(sum - 1.0) < 1e-9);
  }
}

TEST_CASE("logit gradient rows sum to zero and match finite differences") {
  Rng rng(18);
  for (int rep = 0; rep < 20; ++rep) {
    int n_labels = 2 + static_cast<int>(rng.Below(3));
    int frames = 2 + static_cast<int>(rng.Below(5));
    LabelSeq z = RandLabelSeq(3, n_labels, &rng);
    if (z.MinFrames() > frames) continue;
    Tensor logits = testutil::RandTensor({frames, n_labels}, &rng, -2, 2);

    ParamMap params{{"logits", Parameter("logits", logits)}};
    auto forward = [&]() {
      return CtcLoss(LogSoftmax(params["logits"]), z);
    };
    GradientMap grads = Backward(forward(), params);

    const Tensor &g = grads.at("logits");
    for (int t = 0; t < frames; ++t) {
      double row = 0.0;
      for (int l = 0; l < n_labels; ++l) row += g.At(t, l);
      CHECK(std::abs(row) < 1e-8);
    }

    auto loss_value = [&]() { return forward()->value[0]; };
    double worst = testutil::FiniteDiffWorstErr(
        loss_value, &params["logits"]->value, g, 8);
    CHECK(worst < 1e-4);

    Tensor direct = CtcLogitGradient(
        LogSoftmax(Constant(params["logits"]->value))->value, z);
    CHECK(testutil::AllClose(direct, g, 1e-10));
  }
}

TEST_CASE("empty label gradient pushes every frame toward blank") {
  Rng rng(19);
  Tensor logprobs = RandLogProbs(4, 3, &rng);
  Tensor g = CtcLogitGradient(logprobs, LabelSeq{});
  for (int64_t t = 0; t < 4; ++t) {
    CHECK(g.At(t, 0) ==
          doctest::Approx(std::exp(logprobs.At(t, 0)) - 1.0).epsilon(1e-12));
    for (int64_t l = 1; l < 3; ++l)
      CHECK(g.At(t, l) ==
            doctest::Approx(std::exp(logprobs.At(t, l))).epsilon(1e-12));
  }
}

TEST_CASE("log-space recursion survives vanishing probabilities") {
  const double tiny = std::log(1e-30);
  Tensor logprobs({4, 3});
  for (int64_t t = 0; t < 4; ++t) {
    logprobs.At(t, 0) = std::log1p(-2e-30);
    logprobs.At(t, 1) = tiny;
    logprobs.At(t, 2) = tiny;
  }
  LabelSeq z{{1}};
  double ll = CtcLogLikelihood(logprobs, z);
  CHECK(std::isfinite(ll));
  Tensor g = CtcLogitGradient(logprobs, z);
  for (int64_t i = 0; i < g.NumElements(); ++i) CHECK(std::isfinite(g[i]));
  Tensor post = CtcLabelPosteriors(logprobs, z);
  for (int64_t i = 0; i < post.NumElements(); ++i)
    CHECK(std::isfinite(post[i]));
}

TEST_CASE("batch loss reductions and invariances") {
  Rng rng(20);
  Tensor lp1 = RandLogProbs(5, 3, &rng);
  Tensor lp2 = RandLogProbs(7, 3, &rng);
  LabelSeq z1{{1}};
  LabelSeq z2{{2, 1}};

  double single = -CtcLogLikelihood(lp1, z1);
  Var one = CtcBatchLoss({Constant(lp1)}, {z1}, {"u1"});
  CHECK(one->value[0] == doctest::Approx(single).epsilon(1e-12));

  Var ab = CtcBatchLoss({Constant(lp1), Constant(lp2)}, {z1, z2},
                        {"u1", "u2"});
  Var ba = CtcBatchLoss({Constant(lp2), Constant(lp1)}, {z2, z1},
                        {"u2", "u1"});
  CHECK(std::abs(ab->value[0] - ba->value[0]) < 1e-12);

  Var twice = CtcBatchLoss({Constant(lp1), Constant(lp1)}, {z1, z1},
                           {"u1", "u1b"});
  CHECK(twice->value[0] == doctest::Approx(single).epsilon(1e-12));

  Var summed = CtcBatchLoss({Constant(lp1), Constant(lp2)}, {z1, z2},
                            {"u1", "u2"}, LossReduction::kSum);
  double want_sum = -CtcLogLikelihood(lp1, z1) - CtcLogLikelihood(lp2, z2);
  CHECK(summed->value[0] == doctest::Approx(want_sum).epsilon(1e-12));

  Tensor short_lp = RandLogProbs(2, 3, &rng);
  LabelSeq too_long{{1, 1, 2}};
  CHECK_THROWS_WITH_AS(
      CtcBatchLoss({Constant(short_lp)}, {too_long}, {"bad_utt"}),
      doctest::Contains("bad_utt"), Error);
}

TEST_CASE("viterbi alignment finds peak frames") {
  const double hi = std::log(0.90);
  const double lo = std::log(0.05);
  Tensor logprobs({5, 3});
  auto set_frame = [&](int t, int label, double peak) {
    for (int l = 0; l < 3; ++l)
      logprobs.At(t, l) = l == label ? peak : std::log((1 - std::exp(peak)) / 2);
  };
  set_frame(0, 0, hi);
  set_frame(1, 1, std::log(0.80));
  set_frame(2, 1, hi);
  set_frame(3, 0, hi);
  set_frame(4, 2, hi);
  (void)lo;

  LabelSeq z{{1, 2}};
  std::vector<AlignedLabel> aligned = ViterbiAlign(logprobs, z);
  REQUIRE(aligned.size() == 2);
  CHECK(aligned[0].label == 1);
  CHECK(aligned[0].first_frame == 1);
  CHECK(aligned[0].last_frame == 2);
  CHECK(aligned[0].peak_frame == 2);
  CHECK(aligned[0].peak_logprob == doctest::Approx(hi));
  CHECK(aligned[1].label == 2);
  CHECK(aligned[1].first_frame == 4);
  CHECK(aligned[1].peak_frame == 4);
}
