#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace dialweight {

using SparseVector = std::map<std::string, double>;

// Document frequencies over a response corpus.
//
//   tf(t, x) = count of t in x
//   idf(t)   = ln((1 + N) / (1 + df(t))) + 1
//
// Tokens never seen in the corpus get df = 0, so idf stays finite and
// positive for them too.
class TfIdfIndex {
 public:
  TfIdfIndex() = default;
  explicit TfIdfIndex(const std::vector<std::vector<std::string>>& documents);

  void add_document(const std::vector<std::string>& tokens);

  std::size_t document_count() const { return documents_; }
  std::size_t document_frequency(const std::string& token) const;
  double idf(const std::string& token) const;

  SparseVector vectorize(const std::vector<std::string>& tokens) const;

  // The vocabulary fingerprint travels with the index so a mismatched
  // vocabulary is caught at evaluation time.
  nlohmann::json to_json(std::uint64_t vocab_fingerprint) const;
  static TfIdfIndex from_json(const nlohmann::json& j, std::uint64_t* vocab_fingerprint = nullptr);
  void save(const std::filesystem::path& path, std::uint64_t vocab_fingerprint) const;
  static TfIdfIndex load(const std::filesystem::path& path, std::uint64_t* vocab_fingerprint = nullptr);

 private:
  std::map<std::string, std::size_t> df_;
  std::size_t documents_ = 0;
};

// 0 when either vector has no non-zero entry.
double cosine_similarity(const SparseVector& a, const SparseVector& b);

double tfidf_similarity(const std::vector<std::string>& context, const std::vector<std::string>& response,
                        const TfIdfIndex& index);

}  // namespace dialweight
