#include "dialweight/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <sstream>

#include "dialweight/error.hpp"
#include "dialweight/rng.hpp"

namespace dialweight {

namespace {

constexpr char kMagic[4] = {'D', 'W', 'C', 'K'};

static_assert(std::endian::native == std::endian::little,
              "checkpoint I/O assumes a little-endian host");

class Writer {
 public:
  template <typename T>
  void put(T v) {
    char buf[sizeof(T)];
    std::memcpy(buf, &v, sizeof(T));
    out_.append(buf, sizeof(T));
  }
  void put_string(const std::string& s) {
    put(static_cast<std::uint32_t>(s.size()));
    out_.append(s);
  }
  void put_tensor(const std::string& name, const Tensor& t) {
    put_string(name);
    put(static_cast<std::uint32_t>(t.rank()));
    for (std::size_t d : t.shape()) put(static_cast<std::uint64_t>(d));
    for (double v : t.values()) put(v);
  }
  void raw(const char* p, std::size_t n) { out_.append(p, n); }
  std::string take() { return std::move(out_); }

 private:
  std::string out_;
};

class Reader {
 public:
  explicit Reader(const std::string& in) : in_(in) {}

  template <typename T>
  T get() {
    need(sizeof(T));
    T v;
    std::memcpy(&v, in_.data() + pos_, sizeof(T));
    pos_ += sizeof(T);
    return v;
  }
  std::string get_string() {
    const auto n = get<std::uint32_t>();
    need(n);
    std::string s = in_.substr(pos_, n);
    pos_ += n;
    return s;
  }
  std::pair<std::string, Tensor> get_tensor() {
    std::string name = get_string();
    const auto rank = get<std::uint32_t>();
    if (rank > 8) throw DataError("checkpoint tensor '" + name + "' has implausible rank");
    std::vector<std::size_t> shape(rank);
    std::size_t count = 1;
    for (auto& d : shape) {
      d = static_cast<std::size_t>(get<std::uint64_t>());
      count *= d;
    }
    need(count * sizeof(double));
    std::vector<double> data(count);
    std::memcpy(data.data(), in_.data() + pos_, count * sizeof(double));
    pos_ += count * sizeof(double);
    return {std::move(name), Tensor(std::move(shape), std::move(data))};
  }
  void expect_magic() {
    need(4);
    if (std::memcmp(in_.data(), kMagic, 4) != 0) throw DataError("not a checkpoint file");
    pos_ += 4;
  }
  bool done() const { return pos_ == in_.size(); }

 private:
  void need(std::size_t n) const {
    if (in_.size() - pos_ < n) throw DataError("checkpoint is truncated");
  }
  const std::string& in_;
  std::size_t pos_ = 0;
};

}  // namespace

std::string serialize_checkpoint(const Checkpoint& ckpt) {
  Writer w;
  w.raw(kMagic, 4);
  w.put(ckpt.version);
  w.put(ckpt.vocab_fingerprint);
  w.put_string(ckpt.metadata.dump());
  w.put(static_cast<std::uint32_t>(ckpt.params.size()));
  for (const auto& [name, p] : ckpt.params) w.put_tensor(name, p.value);
  w.put(static_cast<std::uint32_t>(ckpt.optimizer_state.size()));
  for (const auto& [name, t] : ckpt.optimizer_state) w.put_tensor(name, t);
  return w.take();
}

Checkpoint deserialize_checkpoint(const std::string& bytes) {
  Reader r(bytes);
  r.expect_magic();
  Checkpoint ckpt;
  ckpt.version = r.get<std::uint32_t>();
  if (ckpt.version != kCheckpointVersion) {
    throw DataError("unsupported checkpoint version " + std::to_string(ckpt.version));
  }
  ckpt.vocab_fingerprint = r.get<std::uint64_t>();
  try {
    ckpt.metadata = nlohmann::json::parse(r.get_string());
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("checkpoint metadata: ") + e.what());
  }
  const auto n_params = r.get<std::uint32_t>();
  for (std::uint32_t i = 0; i < n_params; ++i) {
    auto [name, t] = r.get_tensor();
    ckpt.params.add(name, std::move(t));
  }
  const auto n_state = r.get<std::uint32_t>();
  for (std::uint32_t i = 0; i < n_state; ++i) {
    auto [name, t] = r.get_tensor();
    ckpt.optimizer_state.emplace(std::move(name), std::move(t));
  }
  if (!r.done()) throw DataError("trailing bytes after checkpoint");
  return ckpt;
}

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot write " + path.string());
  const std::string bytes = serialize_checkpoint(ckpt);
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw DataError("failed writing " + path.string());
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return deserialize_checkpoint(ss.str());
}

std::uint64_t checkpoint_fingerprint(const Checkpoint& ckpt) {
  return fnv1a64(serialize_checkpoint(ckpt));
}

std::string hex64(std::uint64_t v) {
  static const char* digits = "0123456789abcdef";
  std::string s(16, '0');
  for (int i = 15; i >= 0; --i, v >>= 4) s[static_cast<std::size_t>(i)] = digits[v & 0xf];
  return s;
}

}  // namespace dialweight
