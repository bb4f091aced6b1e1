// Copyright 2026 The unmt-lab Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "unmt/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>
#include <stdexcept>

#include "json.hpp"

static_assert(std::endian::native == std::endian::little,
              "checkpoint I/O assumes a little-endian host");

namespace unmt {

namespace {

constexpr char kMagic[8] = {'U', 'N', 'M', 'T', 'C', 'K', 'P', 'T'};

class Writer {
 public:
  template <class T>
  void pod(const T& v) {
    const auto* p = reinterpret_cast<const std::uint8_t*>(&v);
    out_.insert(out_.end(), p, p + sizeof(T));
  }
  void bytes(const void* data, std::size_t n) {
    const auto* p = static_cast<const std::uint8_t*>(data);
    out_.insert(out_.end(), p, p + n);
  }
  void str64(const std::string& s) {
    pod<std::uint64_t>(s.size());
    bytes(s.data(), s.size());
  }
  std::vector<std::uint8_t> take() { return std::move(out_); }

 private:
  std::vector<std::uint8_t> out_;
};

class Reader {
 public:
  explicit Reader(const std::vector<std::uint8_t>& in) : in_(in) {}
  template <class T>
  T pod() {
    T v;
    std::memcpy(&v, need(sizeof(T)), sizeof(T));
    return v;
  }
  std::string str(std::size_t n) {
    const auto* p = need(n);
    return std::string(reinterpret_cast<const char*>(p), n);
  }
  void raw(void* dst, std::size_t n) { std::memcpy(dst, need(n), n); }
  bool done() const { return at_ == in_.size(); }

 private:
  const std::uint8_t* need(std::size_t n) {
    if (n > in_.size() - at_) {
      throw std::runtime_error("checkpoint truncated at byte " +
                               std::to_string(at_));
    }
    const auto* p = in_.data() + at_;
    at_ += n;
    return p;
  }
  const std::vector<std::uint8_t>& in_;
  std::size_t at_ = 0;
};

}  // namespace

std::vector<std::uint8_t> serialize_checkpoint(const Checkpoint& ckpt) {
  nlohmann::ordered_json header;
  header["model"] = {{"src_vocab", ckpt.config.src_vocab},
                     {"trg_vocab", ckpt.config.trg_vocab},
                     {"emb_dim", ckpt.config.emb_dim},
                     {"hidden", ckpt.config.hidden},
                     {"attn_dim", ckpt.config.attn_dim},
                     {"freeze_embeddings", ckpt.config.freeze_embeddings},
                     {"init_scale", ckpt.config.init_scale}};
  header["iteration"] = ckpt.iteration;
  header["src_vocab"] = ckpt.src_vocab;
  header["trg_vocab"] = ckpt.trg_vocab;
  header["config"] = ckpt.config_echo;

  Writer w;
  w.bytes(kMagic, sizeof kMagic);
  w.pod<std::uint32_t>(kCheckpointVersion);
  w.str64(header.dump());
  w.pod<std::uint64_t>(ckpt.params.size());
  for (std::size_t i = 0; i < ckpt.params.size(); ++i) {
    const std::string& name = ckpt.params.name(i);
    const Tensor& t = ckpt.params.value(i);
    w.pod<std::uint32_t>(static_cast<std::uint32_t>(name.size()));
    w.bytes(name.data(), name.size());
    w.pod<std::uint8_t>(ckpt.params.trainable(i) ? 1 : 0);
    w.pod<std::uint64_t>(t.rows());
    w.pod<std::uint64_t>(t.cols());
    w.bytes(t.values().data(), t.size() * sizeof(double));
  }
  w.str64(ckpt.rng_state);
  return w.take();
}

Checkpoint deserialize_checkpoint(const std::vector<std::uint8_t>& bytes) {
  Reader r(bytes);
  if (r.str(sizeof kMagic) != std::string(kMagic, sizeof kMagic)) {
    throw std::runtime_error("not a checkpoint (bad magic)");
  }
  const auto version = r.pod<std::uint32_t>();
  if (version != kCheckpointVersion) {
    throw std::runtime_error("unsupported checkpoint version " +
                             std::to_string(version));
  }
  Checkpoint ckpt;
  try {
    const auto header =
        nlohmann::json::parse(r.str(r.pod<std::uint64_t>()));
    const auto& m = header.at("model");
    ckpt.config.src_vocab = m.at("src_vocab");
    ckpt.config.trg_vocab = m.at("trg_vocab");
    ckpt.config.emb_dim = m.at("emb_dim");
    ckpt.config.hidden = m.at("hidden");
    ckpt.config.attn_dim = m.at("attn_dim");
    ckpt.config.freeze_embeddings = m.at("freeze_embeddings");
    ckpt.config.init_scale = m.at("init_scale");
    ckpt.iteration = header.at("iteration");
    ckpt.src_vocab = header.at("src_vocab").get<std::vector<std::string>>();
    ckpt.trg_vocab = header.at("trg_vocab").get<std::vector<std::string>>();
    ckpt.config_echo = header.at("config").get<std::string>();
  } catch (const nlohmann::json::exception& e) {
    throw std::runtime_error(std::string("checkpoint header: ") + e.what());
  }
  const auto count = r.pod<std::uint64_t>();
  for (std::uint64_t k = 0; k < count; ++k) {
    std::string name = r.str(r.pod<std::uint32_t>());
    const bool trainable = r.pod<std::uint8_t>() != 0;
    const auto rows = r.pod<std::uint64_t>();
    const auto cols = r.pod<std::uint64_t>();
    if (cols != 0 && rows > (std::uint64_t{1} << 40) / cols) {
      throw std::runtime_error("checkpoint tensor '" + name + "' is too large");
    }
    std::vector<double> values(rows * cols);
    r.raw(values.data(), values.size() * sizeof(double));
    ckpt.params.add(std::move(name),
                    Tensor::from(rows, cols, std::move(values)), trainable);
  }
  ckpt.rng_state = r.str(r.pod<std::uint64_t>());
  if (!r.done()) throw std::runtime_error("trailing bytes after checkpoint");
  return ckpt;
}

void save_checkpoint(const std::string& path, const Checkpoint& ckpt) {
  const auto bytes = serialize_checkpoint(ckpt);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error(path + ": cannot open for writing");
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
  if (!out) throw std::runtime_error(path + ": write error");
}

Checkpoint load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error(path + ": cannot open checkpoint");
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                  std::istreambuf_iterator<char>());
  try {
    return deserialize_checkpoint(bytes);
  } catch (const std::runtime_error& e) {
    throw std::runtime_error(path + ": " + e.what());
  }
}

Vocabulary checkpoint_vocab(const Checkpoint& ckpt, model::Lang lang) {
  const auto& tokens =
      lang == model::Lang::kSrc ? ckpt.src_vocab : ckpt.trg_vocab;
  Vocabulary v(model::lang_name(lang));
  for (std::size_t i = kNumSpecial; i < tokens.size(); ++i) v.add(tokens[i]);
  if (v.size() != tokens.size()) {
    throw std::runtime_error("checkpoint vocabulary has duplicate tokens");
  }
  return v;
}

}  // namespace unmt
