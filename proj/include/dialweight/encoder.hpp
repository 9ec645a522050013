#pragma once

#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "dialweight/layers.hpp"

namespace dialweight {

class Vocabulary;

struct EncoderShape {
  std::size_t embedding_dim = 32;
  std::size_t hidden_dim = 64;
  bool bidirectional = false;

  std::size_t output_dim() const { return bidirectional ? 2 * hidden_dim : hidden_dim; }
};

// Token ids -> embedding lookup -> dropout -> GRU -> final state -> dropout.
// With `bidirectional`, a second GRU ("<gru>_bwd") reads the reversed
// sequence and its final state is appended. An empty id sequence is read as
// a single <pad>.
class SequenceEncoder {
 public:
  SequenceEncoder(std::string embedding, std::string gru, EncoderShape shape)
      : embedding_(std::move(embedding)), gru_(std::move(gru)), shape_(shape) {}

  // Adds the GRU parameters (not the embedding table, which may be shared).
  void add_params(ParamSet& params, Rng& rng) const;

  struct Cache {
    std::vector<int> ids;
    Tensor input_mask;
    GruCache forward;
    std::optional<GruCache> backward;
    std::vector<double> output_mask;
  };

  std::vector<double> encode(std::span<const int> ids, const ParamSet& params, double dropout_rate,
                             bool training, Rng& rng, Cache* cache) const;
  void backward(const Cache& cache, std::span<const double> d_output, ParamSet& params) const;

  const EncoderShape& shape() const { return shape_; }

 private:
  std::string embedding_;
  std::string gru_;
  EncoderShape shape_;
};

// Reads "token v1 v2 ..." lines and overwrites the matching rows of the
// V x E table. Tokens outside the vocabulary are skipped; rows for tokens
// absent from the file keep their initial values. Returns the number of rows
// replaced. A vector of the wrong length is a ParseError with its line.
std::size_t load_pretrained_embeddings(std::istream& in, const Vocabulary& vocab, Tensor& table);

}  // namespace dialweight
