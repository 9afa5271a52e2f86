#include "atom/codec.hpp"

#include <algorithm>
#include <chrono>

#include "atom/bytes.hpp"
#include "atom/error.hpp"

namespace atom {

namespace {

constexpr char kMagic[4] = {'A', 'T', 'O', 'M'};
constexpr std::size_t kMaxOverreadBits = 64;

enum Tag : std::uint8_t {
  kScenario = 1,
  kTopologyHash = 2,
  kLinkOrderHash = 3,
  kWindow = 4,
  kAlphabet = 5,
  kModelKind = 6,
  kModelChecksum = 7,
  kStaticModel = 8,
  kBins = 9,
  kLinks = 10,
  kBinDuration = 11,
  kEmbeddedModel = 12,
};

void field(ByteWriter& w, std::uint8_t tag, std::span<const std::uint8_t> value) {
  w.u8(tag);
  w.blob(value);
}

template <typename F>
void fieldWith(ByteWriter& w, std::uint8_t tag, F fill) {
  ByteWriter inner;
  fill(inner);
  field(w, tag, inner.buffer());
}

bool isNeural(const std::string& kind) { return kind == "rnn" || kind == "stgnn"; }

void checkScenario(const CodecModel& m, Scope scenario) {
  if (m.kind == "rnn" && scenario != Scope::SingleLink) {
    throw AtomError(ErrorCode::ScenarioMismatch, "RNN models code the single-link scenario only");
  }
  if (m.kind == "stgnn" && scenario != Scope::NetworkWide) {
    throw AtomError(ErrorCode::ScenarioMismatch, "ST-GNN models code the network-wide scenario only");
  }
  if (auto* s = dynamic_cast<const StaticModel*>(m.model.get()); s && s->scope() != scenario) {
    throw AtomError(ErrorCode::ScenarioMismatch, std::string("static model fitted for ") + toString(s->scope()));
  }
  if (auto* a = dynamic_cast<const AdaptiveModel*>(m.model.get()); a && a->scope() != scenario) {
    throw AtomError(ErrorCode::ScenarioMismatch, std::string("adaptive model built for ") + toString(a->scope()));
  }
}

std::size_t windowFor(const CodecModel& m, const CodecOptions& opts) {
  const std::size_t w = m.window.value_or(opts.window);
  if (w == 0) throw AtomError(ErrorCode::InvalidArgument, "window must be positive");
  return w;
}

ContainerHeader makeHeader(const CodecModel& m, const Topology& topology, Scope scenario, std::size_t window,
                           const SymbolAlphabet& alphabet, bool embed) {
  if (!m.model) throw AtomError(ErrorCode::InvalidArgument, "no probability model");
  if (m.model->alphabetSize() != alphabet.size()) {
    throw AtomError(ErrorCode::ShapeMismatch, "model alphabet " + std::to_string(m.model->alphabetSize()) +
                                                  " vs data alphabet " + std::to_string(alphabet.size()));
  }
  checkScenario(m, scenario);
  ContainerHeader h;
  h.scenario = scenario;
  h.topologyHash = topology.hash();
  h.linkOrderHash = topology.linkOrderHash();
  h.window = static_cast<std::uint32_t>(window);
  h.alphabet = alphabet;
  h.modelKind = m.kind;
  h.modelChecksum = m.checksum;
  h.staticModel = m.staticBlob;
  if (embed && isNeural(m.kind)) h.embeddedModel = m.weights;
  h.links = static_cast<std::uint32_t>(topology.numLinks());
  return h;
}

// Symbols of the current bin known so far; zero elsewhere so encoder and
// decoder see identical buffers.
struct BinMask {
  std::vector<std::uint8_t> mask;
  std::vector<Symbol> known;
  explicit BinMask(std::size_t links) : mask(links, 0), known(links, 0) {}
  void reset() {
    std::fill(mask.begin(), mask.end(), 0);
    std::fill(known.begin(), known.end(), 0);
  }
  void set(std::size_t j, Symbol s) {
    mask[j] = 1;
    known[j] = s;
  }
};

ModelContext contextFor(std::span<const Symbol> window, std::size_t w, std::size_t links, const LinkGraph* graph) {
  ModelContext ctx;
  ctx.window = window;
  ctx.windowBins = w;
  ctx.links = links;
  ctx.graph = graph;
  return ctx;
}

void checkTensor(const TrafficTensor& x, const Topology& topology, std::size_t w) {
  if (x.links() != topology.numLinks()) {
    throw AtomError(ErrorCode::ShapeMismatch, "tensor has " + std::to_string(x.links()) + " links, topology has " +
                                                  std::to_string(topology.numLinks()));
  }
  if (x.bins() <= w) {
    throw AtomError(ErrorCode::InvalidArgument, "nothing beyond bootstrap: " + std::to_string(x.bins()) +
                                                    " bins with window " + std::to_string(w));
  }
}

}  // namespace

std::size_t AtomContainer::payloadBytes() const noexcept {
  std::size_t n = 0;
  for (const auto& s : streams) n += s.size();
  return n;
}

std::vector<std::uint8_t> AtomContainer::serialize() const {
  const ContainerHeader& h = header;
  ByteWriter w;
  w.bytes({reinterpret_cast<const std::uint8_t*>(kMagic), 4});
  w.u8(ContainerHeader::kFormatVersion);
  ByteWriter fields;
  std::uint32_t count = 0;
  auto add = [&](std::uint8_t tag, auto&& fill) {
    fieldWith(fields, tag, fill);
    ++count;
  };
  add(kScenario, [&](ByteWriter& f) { f.u8(static_cast<std::uint8_t>(h.scenario)); });
  add(kTopologyHash, [&](ByteWriter& f) { f.bytes(h.topologyHash); });
  add(kLinkOrderHash, [&](ByteWriter& f) { f.bytes(h.linkOrderHash); });
  add(kWindow, [&](ByteWriter& f) { f.u32(h.window); });
  add(kAlphabet, [&](ByteWriter& f) { f.bytes(h.alphabet.serialize()); });
  add(kModelKind, [&](ByteWriter& f) { f.bytes({reinterpret_cast<const std::uint8_t*>(h.modelKind.data()), h.modelKind.size()}); });
  if (h.modelChecksum) add(kModelChecksum, [&](ByteWriter& f) { f.bytes(*h.modelChecksum); });
  if (!h.staticModel.empty()) add(kStaticModel, [&](ByteWriter& f) { f.bytes(h.staticModel); });
  add(kBins, [&](ByteWriter& f) { f.u64(h.bins); });
  add(kLinks, [&](ByteWriter& f) { f.u32(h.links); });
  add(kBinDuration, [&](ByteWriter& f) { f.f64(h.binDuration); });
  if (!h.embeddedModel.empty()) add(kEmbeddedModel, [&](ByteWriter& f) { f.bytes(h.embeddedModel); });
  w.u32(count);
  w.bytes(fields.buffer());
  w.u32(static_cast<std::uint32_t>(streams.size()));
  for (const auto& s : streams) w.u64(s.size());
  for (const auto& s : streams) w.bytes(s);
  return w.take();
}

AtomContainer AtomContainer::deserialize(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < 5 || !std::equal(kMagic, kMagic + 4, bytes.begin())) {
    throw AtomError(ErrorCode::CorruptContainer, "not an ATOM container (bad magic)");
  }
  ByteReader r(bytes, "container");
  r.bytes(4);
  const auto version = r.u8();
  if (version != ContainerHeader::kFormatVersion) {
    throw AtomError(ErrorCode::CorruptContainer, "unsupported container version " + std::to_string(version));
  }
  AtomContainer c;
  ContainerHeader& h = c.header;
  const auto count = r.u32();
  std::uint32_t seen = 0;
  auto digest = [](std::span<const std::uint8_t> v) {
    if (v.size() != 32) throw AtomError(ErrorCode::CorruptContainer, "hash field has wrong length");
    Digest d{};
    std::copy(v.begin(), v.end(), d.begin());
    return d;
  };
  for (std::uint32_t i = 0; i < count; ++i) {
    const auto tag = r.u8();
    const auto value = r.blob();
    ByteReader f(value, "header field " + std::to_string(tag));
    switch (tag) {
      case kScenario: {
        const auto s = f.u8();
        if (s > 1) throw AtomError(ErrorCode::CorruptContainer, "bad scenario");
        h.scenario = static_cast<Scope>(s);
        break;
      }
      case kTopologyHash: h.topologyHash = digest(value); break;
      case kLinkOrderHash: h.linkOrderHash = digest(value); break;
      case kWindow: h.window = f.u32(); break;
      case kAlphabet: h.alphabet = SymbolAlphabet::deserialize(value); break;
      case kModelKind: h.modelKind.assign(value.begin(), value.end()); break;
      case kModelChecksum: h.modelChecksum = digest(value); break;
      case kStaticModel: h.staticModel.assign(value.begin(), value.end()); break;
      case kBins: h.bins = f.u64(); break;
      case kLinks: h.links = f.u32(); break;
      case kBinDuration: h.binDuration = f.f64(); break;
      case kEmbeddedModel: h.embeddedModel.assign(value.begin(), value.end()); break;
      default: continue;  // unknown fields are skipped
    }
    seen |= 1u << tag;
  }
  constexpr std::uint32_t required = (1u << kScenario) | (1u << kTopologyHash) | (1u << kLinkOrderHash) |
                                     (1u << kWindow) | (1u << kAlphabet) | (1u << kModelKind) | (1u << kBins) |
                                     (1u << kLinks);
  if ((seen & required) != required) throw AtomError(ErrorCode::CorruptContainer, "container header is missing fields");
  const auto streams = r.u32();
  const std::size_t expected = h.scenario == Scope::NetworkWide ? 1 : h.links;
  if (streams != expected) {
    throw AtomError(ErrorCode::CorruptContainer, "container has " + std::to_string(streams) + " streams, expected " +
                                                     std::to_string(expected));
  }
  std::vector<std::uint64_t> sizes(streams);
  for (auto& s : sizes) s = r.u64();
  for (auto s : sizes) {
    if (s > r.remaining()) {
      throw AtomError(ErrorCode::CorruptContainer, "payload truncated at byte " + std::to_string(r.position()) + " (stream needs " +
                                                       std::to_string(s) + ", have " + std::to_string(r.remaining()) + ")");
    }
    const auto b = r.bytes(static_cast<std::size_t>(s));
    c.streams.emplace_back(b.begin(), b.end());
  }
  if (!r.done()) throw AtomError(ErrorCode::CorruptContainer, "trailing bytes after payload");
  return c;
}

void AtomContainer::save(const std::string& path) const { writeFile(path, serialize()); }

AtomContainer AtomContainer::load(const std::string& path) { return deserialize(readFile(path)); }

CodecModel CodecModel::uniform(std::size_t alphabetSize) {
  CodecModel m;
  m.model = std::make_shared<UniformModel>(alphabetSize);
  m.kind = "uniform";
  return m;
}

CodecModel CodecModel::fitted(StaticModel model) {
  CodecModel m;
  m.staticBlob = model.serialize();
  m.model = std::make_shared<StaticModel>(std::move(model));
  m.kind = "static";
  return m;
}

CodecModel CodecModel::adaptive(Scope scope, std::size_t alphabetSize) {
  CodecModel m;
  m.model = std::make_shared<AdaptiveModel>(scope, alphabetSize);
  m.kind = "adaptive";
  return m;
}

CodecModel CodecModel::neural(std::shared_ptr<const nn::PredictorModel> model, const LinkGraph& graph) {
  CodecModel m;
  m.kind = nn::toString(model->arch().kind);
  m.weights = model->serialize();
  Digest d{};
  std::copy(m.weights.end() - 32, m.weights.end(), d.begin());
  m.checksum = d;
  m.window = model->arch().windowSize;
  m.model = std::make_shared<nn::NeuralModel>(std::move(model), graph);
  return m;
}

CodecModel modelForHeader(const ContainerHeader& h, const Topology& topology,
                          std::shared_ptr<const nn::PredictorModel> neural) {
  const std::size_t a = h.alphabet.size();
  if (h.modelKind == "uniform") return CodecModel::uniform(a);
  if (h.modelKind == "adaptive") return CodecModel::adaptive(h.scenario, a);
  if (h.modelKind == "static") {
    if (h.staticModel.empty()) throw AtomError(ErrorCode::CorruptContainer, "static container without histograms");
    return CodecModel::fitted(StaticModel::deserialize(h.staticModel));
  }
  if (isNeural(h.modelKind)) {
    if (!neural) {
      if (h.embeddedModel.empty()) {
        throw AtomError(ErrorCode::InvalidArgument, "container needs the " + h.modelKind + " model file to decode");
      }
      neural = std::make_shared<nn::PredictorModel>(nn::PredictorModel::deserialize(h.embeddedModel));
    }
    return CodecModel::neural(std::move(neural), buildLinkGraph(topology));
  }
  throw AtomError(ErrorCode::CorruptContainer, "unknown model kind '" + h.modelKind + "'");
}

AtomContainer compress(const TrafficTensor& x, const CodecModel& model, const Topology& topology, Scope scenario,
                       const CodecOptions& opts) {
  const std::size_t w = windowFor(model, opts);
  checkTensor(x, topology, w);
  AtomContainer c;
  c.header = makeHeader(model, topology, scenario, w, x.alphabet(), opts.embedModel);
  c.header.bins = x.bins();
  c.header.binDuration = x.binDuration();
  const std::size_t links = x.links();
  const LinkGraph graph = buildLinkGraph(topology);
  const SymbolPmf uniform = SymbolPmf::uniform(x.alphabet().size());
  const bool networkWide = scenario == Scope::NetworkWide;
  std::vector<ArithEncoder> enc(networkWide ? 1 : links);
  auto encoderFor = [&](std::size_t j) -> ArithEncoder& { return enc[networkWide ? 0 : j]; };
  BinMask bm(links);
  for (std::size_t t = 0; t < x.bins(); ++t) {
    if (t < w) {
      for (std::size_t j = 0; j < links; ++j) {
        if (opts.observer) opts.observer(t, j, ModelContext{}, uniform);
        encoderFor(j).encode(x.at(t, j), uniform);
      }
      continue;
    }
    ModelContext ctx = contextFor(x.data().subspan((t - w) * links, w * links), w, links, &graph);
    const auto predictor = model.model->beginBin(ctx);
    bm.reset();
    for (std::size_t j = 0; j < links; ++j) {
      ctx.targetLink = j;
      if (networkWide) {
        ctx.mask = bm.mask;
        ctx.known = bm.known;
      }
      const SymbolPmf pmf = predictor->predict(ctx);
      if (opts.observer) opts.observer(t, j, ctx, pmf);
      encoderFor(j).encode(x.at(t, j), pmf);
      bm.set(j, x.at(t, j));
    }
  }
  for (auto& e : enc) c.streams.push_back(e.finish());
  return c;
}

TrafficTensor decompress(const AtomContainer& c, const CodecModel* supplied, const Topology& topology,
                         const PmfObserver& observer) {
  const ContainerHeader& h = c.header;
  if (h.topologyHash != topology.hash() || h.linkOrderHash != topology.linkOrderHash()) {
    throw AtomError(ErrorCode::ChecksumMismatch, "topology '" + topology.name() + "' does not match the container");
  }
  if (h.links != topology.numLinks()) throw AtomError(ErrorCode::ShapeMismatch, "link count differs from topology");
  CodecModel own;
  if (!supplied) {
    own = modelForHeader(h, topology);
    supplied = &own;
  }
  const CodecModel& model = *supplied;
  if (model.kind != h.modelKind) {
    throw AtomError(ErrorCode::ChecksumMismatch, "container was coded with a " + h.modelKind + " model, got " + model.kind);
  }
  if (model.checksum != h.modelChecksum) {
    throw AtomError(ErrorCode::ChecksumMismatch, "model checksum " + (model.checksum ? toHex(*model.checksum) : "none") +
                                                     " differs from the container's");
  }
  if (model.kind == "static" && model.staticBlob != h.staticModel) {
    throw AtomError(ErrorCode::ChecksumMismatch, "static histograms differ from the container's");
  }
  if (!model.model || model.model->alphabetSize() != h.alphabet.size()) {
    throw AtomError(ErrorCode::ShapeMismatch, "model alphabet differs from the container's");
  }
  checkScenario(model, h.scenario);
  if (model.window && *model.window != h.window) throw AtomError(ErrorCode::ShapeMismatch, "model window differs");
  const std::size_t w = h.window;
  const std::size_t links = h.links;
  const auto bins = static_cast<std::size_t>(h.bins);
  if (bins <= w || links == 0) throw AtomError(ErrorCode::CorruptContainer, "header has no coded bins");
  const bool networkWide = h.scenario == Scope::NetworkWide;
  std::vector<ArithDecoder> dec;
  for (const auto& s : c.streams) dec.emplace_back(s);
  const std::uint64_t perStream = networkWide ? static_cast<std::uint64_t>(bins) * links : bins;
  for (std::size_t i = 0; i < dec.size(); ++i) {
    if (dec[i].symbolCount() != perStream) {
      throw AtomError(ErrorCode::CorruptContainer, "stream " + std::to_string(i) + " holds " +
                                                       std::to_string(dec[i].symbolCount()) + " symbols, expected " +
                                                       std::to_string(perStream));
    }
  }
  TrafficTensor out(bins, links, h.alphabet, h.binDuration);
  std::vector<Symbol> data(bins * links, 0);
  const LinkGraph graph = buildLinkGraph(topology);
  const SymbolPmf uniform = SymbolPmf::uniform(h.alphabet.size());
  BinMask bm(links);
  auto decodeOne = [&](std::size_t t, std::size_t j, const SymbolPmf& pmf) {
    ArithDecoder& d = dec[networkWide ? 0 : j];
    Symbol s = 0;
    try {
      s = d.decode(pmf);
    } catch (const AtomError& e) {
      throw AtomError(ErrorCode::CorruptContainer, "bin " + std::to_string(t) + ", link " + std::to_string(j) + ": " + e.what());
    }
    if (d.overreadBits() > kMaxOverreadBits) {
      throw AtomError(ErrorCode::CorruptContainer,
                      "payload exhausted at bin " + std::to_string(t) + ", link " + std::to_string(j));
    }
    data[t * links + j] = s;
    return s;
  };
  for (std::size_t t = 0; t < bins; ++t) {
    if (t < w) {
      for (std::size_t j = 0; j < links; ++j) {
        if (observer) observer(t, j, ModelContext{}, uniform);
        decodeOne(t, j, uniform);
      }
      continue;
    }
    ModelContext ctx = contextFor(std::span<const Symbol>(data).subspan((t - w) * links, w * links), w, links, &graph);
    const auto predictor = model.model->beginBin(ctx);
    bm.reset();
    for (std::size_t j = 0; j < links; ++j) {
      ctx.targetLink = j;
      if (networkWide) {
        ctx.mask = bm.mask;
        ctx.known = bm.known;
      }
      const SymbolPmf pmf = predictor->predict(ctx);
      if (observer) observer(t, j, ctx, pmf);
      bm.set(j, decodeOne(t, j, pmf));
    }
  }
  for (std::size_t t = 0; t < bins; ++t) {
    for (std::size_t j = 0; j < links; ++j) out.set(t, j, data[t * links + j]);
  }
  return out;
}

double compressionRatio(std::size_t rawBytes, std::size_t compressedBytes) {
  if (compressedBytes == 0) throw AtomError(ErrorCode::InvalidArgument, "compressed size is zero");
  return static_cast<double>(rawBytes) / static_cast<double>(compressedBytes);
}

StreamCompressor::StreamCompressor(CodecModel model, const Topology& topology, Scope scenario, SymbolAlphabet alphabet,
                                   const CodecOptions& opts)
    : model_(std::move(model)),
      window_(windowFor(model_, opts)),
      links_(topology.numLinks()),
      scenario_(scenario),
      topology_(&topology),
      graph_(buildLinkGraph(topology)) {
  header_ = makeHeader(model_, topology, scenario, window_, alphabet, opts.embedModel);
  const std::size_t n = scenario == Scope::NetworkWide ? 1 : links_;
  encoders_.resize(n);
  drained_.assign(n, 0);
  streams_.resize(n);
}

std::vector<std::vector<std::uint8_t>> StreamCompressor::drain() {
  std::vector<std::vector<std::uint8_t>> out(encoders_.size());
  for (std::size_t i = 0; i < encoders_.size(); ++i) {
    const auto& buf = encoders_[i].pendingBuffer();
    const std::size_t stable = encoders_[i].stableBytes();
    out[i].assign(buf.begin() + static_cast<std::ptrdiff_t>(drained_[i]), buf.begin() + static_cast<std::ptrdiff_t>(stable));
    drained_[i] = stable;
    streams_[i].insert(streams_[i].end(), out[i].begin(), out[i].end());
  }
  return out;
}

std::vector<std::vector<std::uint8_t>> StreamCompressor::push(std::span<const Symbol> bin) {
  if (finished_) throw AtomError(ErrorCode::CoderFinished, "stream already finished");
  if (bin.size() != links_) {
    throw AtomError(ErrorCode::ShapeMismatch, "bin has " + std::to_string(bin.size()) + " values, expected " +
                                                  std::to_string(links_));
  }
  const std::size_t a = header_.alphabet.size();
  for (Symbol s : bin) {
    if (s >= a) throw AtomError(ErrorCode::InvalidArgument, "symbol " + std::to_string(s) + " outside the alphabet");
  }
  const auto start = std::chrono::steady_clock::now();
  const bool networkWide = scenario_ == Scope::NetworkWide;
  auto encoderFor = [&](std::size_t j) -> ArithEncoder& { return encoders_[networkWide ? 0 : j]; };
  if (bins_ < window_) {
    const SymbolPmf uniform = SymbolPmf::uniform(a);
    for (std::size_t j = 0; j < links_; ++j) encoderFor(j).encode(bin[j], uniform);
  } else {
    ModelContext ctx = contextFor(history_, window_, links_, &graph_);
    const auto predictor = model_.model->beginBin(ctx);
    BinMask bm(links_);
    for (std::size_t j = 0; j < links_; ++j) {
      ctx.targetLink = j;
      if (networkWide) {
        ctx.mask = bm.mask;
        ctx.known = bm.known;
      }
      encoderFor(j).encode(bin[j], predictor->predict(ctx));
      bm.set(j, bin[j]);
    }
  }
  history_.insert(history_.end(), bin.begin(), bin.end());
  if (history_.size() > window_ * links_) {
    history_.erase(history_.begin(), history_.begin() + static_cast<std::ptrdiff_t>(links_));
  }
  ++bins_;
  binSeconds_.push_back(std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count());
  return drain();
}

std::vector<std::vector<std::uint8_t>> StreamCompressor::finish() {
  if (finished_) throw AtomError(ErrorCode::CoderFinished, "stream already finished");
  finished_ = true;
  std::vector<std::vector<std::uint8_t>> out(encoders_.size());
  for (std::size_t i = 0; i < encoders_.size(); ++i) {
    const auto all = encoders_[i].finish();
    out[i].assign(all.begin() + static_cast<std::ptrdiff_t>(drained_[i]), all.end());
    streams_[i].insert(streams_[i].end(), out[i].begin(), out[i].end());
  }
  return out;
}

AtomContainer StreamCompressor::container() const {
  if (!finished_) throw AtomError(ErrorCode::InvalidArgument, "container() before finish()");
  if (bins_ <= window_) throw AtomError(ErrorCode::InvalidArgument, "nothing beyond bootstrap");
  AtomContainer c;
  c.header = header_;
  c.header.bins = bins_;
  c.streams = streams_;
  return c;
}

}  // namespace atom
