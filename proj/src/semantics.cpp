#include "arise/semantics.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <thread>

#include <httplib.h>
#include <openssl/evp.h>

#include "arise/error.hpp"

namespace arise {
namespace {

std::string join(std::span<const std::string> items, std::string_view sep) {
  std::string out;
  for (std::size_t i = 0; i < items.size(); ++i) {
    if (i) out += sep;
    out += items[i];
  }
  return out;
}

void replace_all(std::string& s, std::string_view from, std::string_view to) {
  for (std::size_t pos = s.find(from); pos != std::string::npos;
       pos = s.find(from, pos + to.size())) {
    s.replace(pos, from.size(), to);
  }
}

std::string trim(std::string_view s) {
  constexpr std::string_view ws = " \t\r\n";
  const auto first = s.find_first_not_of(ws);
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(ws);
  return std::string(s.substr(first, last - first + 1));
}

struct ParsedUrl {
  std::string origin; // scheme://host[:port]
  std::string prefix; // path without trailing slash
};

ParsedUrl parse_url(const std::string& url) {
  const auto scheme_end = url.find("://");
  if (scheme_end == std::string::npos) {
    throw ConfigError(Stage::semantics, "endpoint '" + url + "' has no scheme");
  }
  const auto path_start = url.find('/', scheme_end + 3);
  ParsedUrl parsed;
  parsed.origin = url.substr(0, path_start);
  if (path_start != std::string::npos) parsed.prefix = url.substr(path_start);
  while (!parsed.prefix.empty() && parsed.prefix.back() == '/') parsed.prefix.pop_back();
  return parsed;
}

} // namespace

const std::string PromptSpec::kDefaultTemplate =
    "Attribute: {attribute}. Value: {value}. Other possible values: {domain}. "
    "Write: 1) Definition: what this value means for this attribute. "
    "2) Indicators: observable characteristics implying this value. "
    "3) Context: situations where this value typically occurs. "
    "4) Contrast: how it differs from each other value. "
    "Be concise; at most {max_words} words per part.";

void PromptSpec::validate() const {
  for (std::string_view placeholder : {"{value}", "{attribute}", "{domain}"}) {
    if (template_text.find(placeholder) == std::string::npos) {
      throw ConfigError(Stage::semantics,
                        "prompt template lacks placeholder " + std::string(placeholder));
    }
  }
  std::size_t pos = 0;
  for (std::size_t i = 0; i < kAspects.size(); ++i) {
    const std::string marker = std::to_string(i + 1) + ") " + std::string(kAspects[i]);
    pos = template_text.find(marker, pos);
    if (pos == std::string::npos) {
      throw ConfigError(Stage::semantics,
                        "prompt template must contain '" + marker + "' after the previous aspect");
    }
  }
  if (max_words == 0) throw ConfigError(Stage::semantics, "max_words must be positive");
}

PromptSpec load_prompt_spec(const std::string& template_path, std::size_t max_words) {
  PromptSpec spec;
  spec.max_words = max_words;
  if (!template_path.empty()) {
    std::ifstream in(template_path, std::ios::binary);
    if (!in) throw IoError(Stage::semantics, "cannot open prompt template '" + template_path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    spec.template_text = trim(buf.str());
  }
  spec.validate();
  return spec;
}

std::string build_prompt(std::string_view value, std::string_view attribute,
                         std::span<const std::string> domain, const PromptSpec& spec) {
  if (std::find(domain.begin(), domain.end(), value) == domain.end()) {
    throw ContractViolation(Stage::semantics, "value '" + std::string(value) +
                                                  "' is not in the domain of '" +
                                                  std::string(attribute) + "'");
  }
  std::string prompt = spec.template_text;
  // {domain} last: domain values may themselves contain brace text.
  replace_all(prompt, "{value}", value);
  replace_all(prompt, "{attribute}", attribute);
  replace_all(prompt, "{max_words}", std::to_string(spec.max_words));
  replace_all(prompt, "{domain}", join(domain, ", "));
  return prompt;
}

std::string sha256_hex(std::string_view data) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(data.data(), data.size(), digest, &len, EVP_sha256(), nullptr) != 1) {
    throw Error(Stage::semantics, "SHA-256 digest failed");
  }
  static constexpr char hex[] = "0123456789abcdef";
  std::string out;
  out.reserve(2 * len);
  for (unsigned int i = 0; i < len; ++i) {
    out.push_back(hex[digest[i] >> 4]);
    out.push_back(hex[digest[i] & 0xF]);
  }
  return out;
}

// ---------------------------------------------------------------- records

nlohmann::json DescriptionRecord::to_json() const {
  nlohmann::json j = extra.is_object() ? extra : nlohmann::json::object();
  j["attribute"] = attribute;
  j["value"] = value;
  j["description"] = description;
  j["model"] = model;
  j["prompt_hash"] = prompt_hash;
  j["created_at"] = created_at;
  return j;
}

DescriptionRecord DescriptionRecord::from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw ParseError(Stage::semantics, "description record is not an object");
  DescriptionRecord r;
  auto field = [&](const char* key) -> std::string {
    const auto it = j.find(key);
    if (it == j.end() || !it->is_string()) {
      throw ParseError(Stage::semantics, std::string("description record lacks string field '") +
                                             key + "'");
    }
    return it->get<std::string>();
  };
  r.attribute = field("attribute");
  r.value = field("value");
  r.description = field("description");
  r.model = field("model");
  r.prompt_hash = field("prompt_hash");
  r.created_at = j.contains("created_at") && j["created_at"].is_string()
                     ? j["created_at"].get<std::string>()
                     : std::string();
  for (auto it = j.begin(); it != j.end(); ++it) {
    static const std::array<std::string_view, 6> known = {
        "attribute", "value", "description", "model", "prompt_hash", "created_at"};
    if (std::find(known.begin(), known.end(), it.key()) == known.end()) {
      r.extra[it.key()] = it.value();
    }
  }
  if (trim(r.description).empty()) {
    throw ParseError(Stage::semantics, "empty description for " + r.attribute + "=" + r.value);
  }
  return r;
}

DescriptionCache::DescriptionCache(std::string path) : path_(std::move(path)) {
  std::ifstream in(path_, std::ios::binary);
  if (!in) return; // created on first append
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    DescriptionRecord r;
    try {
      r = DescriptionRecord::from_json(nlohmann::json::parse(line));
    } catch (const nlohmann::json::exception& e) {
      throw ParseError(Stage::semantics,
                       path_ + ":" + std::to_string(line_no) + ": " + e.what());
    } catch (const ParseError& e) {
      throw ParseError(Stage::semantics,
                       path_ + ":" + std::to_string(line_no) + ": " + e.what());
    }
    Key key{r.attribute, r.value, r.model, r.prompt_hash};
    if (index_.emplace(std::move(key), records_.size()).second) records_.push_back(std::move(r));
  }
}

std::optional<DescriptionRecord> DescriptionCache::find(const std::string& attribute,
                                                        const std::string& value,
                                                        const std::string& model,
                                                        const std::string& prompt_hash) const {
  std::lock_guard lock(mutex_);
  const auto it = index_.find(Key{attribute, value, model, prompt_hash});
  if (it == index_.end()) return std::nullopt;
  return records_[it->second];
}

std::optional<DescriptionRecord> DescriptionCache::find_any(const std::string& attribute,
                                                            const std::string& value) const {
  std::lock_guard lock(mutex_);
  for (const auto& r : records_) {
    if (r.attribute == attribute && r.value == value) return r;
  }
  return std::nullopt;
}

bool DescriptionCache::append(const DescriptionRecord& record) {
  if (trim(record.description).empty()) {
    throw EmptyDescriptionError(Stage::semantics, "refusing to cache an empty description for " +
                                                      record.attribute + "=" + record.value);
  }
  std::lock_guard lock(mutex_);
  Key key{record.attribute, record.value, record.model, record.prompt_hash};
  if (!index_.emplace(std::move(key), records_.size()).second) return false;
  records_.push_back(record);
  if (!path_.empty()) {
    std::ofstream out(path_, std::ios::binary | std::ios::app);
    if (!out) throw IoError(Stage::semantics, "cannot append to cache '" + path_ + "'");
    out << record.to_json().dump() << '\n';
    out.flush();
  }
  return true;
}

std::vector<DescriptionRecord> DescriptionCache::records() const {
  std::lock_guard lock(mutex_);
  return records_;
}

std::size_t DescriptionCache::size() const {
  std::lock_guard lock(mutex_);
  return records_.size();
}

void write_cache_file(const std::string& path, std::span<const DescriptionRecord> records) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError(Stage::semantics, "cannot write cache '" + path + "'");
  for (const auto& r : records) out << r.to_json().dump() << '\n';
}

// ---------------------------------------------------------------- sources

void LlmEndpointConfig::validate() const {
  if (temperature < 0.0) throw ConfigError(Stage::semantics, "temperature must be >= 0");
  if (max_retries < 0) throw ConfigError(Stage::semantics, "max_retries must be >= 0");
  if (timeout_seconds <= 0) throw ConfigError(Stage::semantics, "timeout_seconds must be > 0");
  if (model.empty()) throw ConfigError(Stage::semantics, "model must be set");
  parse_url(base_url);
}

std::string StubLlm::describe(const std::string&, std::string_view value,
                              std::string_view attribute, std::span<const std::string> domain) {
  return "VALUE " + std::string(value) + " OF " + std::string(attribute) + " AMONG " +
         join(domain, ", ");
}

HttpLlm::HttpLlm(LlmEndpointConfig cfg) : cfg_(std::move(cfg)) { cfg_.validate(); }

std::string HttpLlm::describe(const std::string& prompt, std::string_view, std::string_view,
                              std::span<const std::string>) {
  const ParsedUrl url = parse_url(cfg_.base_url);
  httplib::Client client(url.origin);
  client.set_connection_timeout(cfg_.timeout_seconds, 0);
  client.set_read_timeout(cfg_.timeout_seconds, 0);
  client.set_write_timeout(cfg_.timeout_seconds, 0);

  httplib::Headers headers;
  if (!cfg_.api_key.empty()) headers.emplace("Authorization", "Bearer " + cfg_.api_key);

  const nlohmann::json body = {
      {"model", cfg_.model},
      {"temperature", cfg_.temperature},
      {"messages", nlohmann::json::array({{{"role", "user"}, {"content", prompt}}})}};
  const std::string payload = body.dump();
  const std::string path = url.prefix + "/chat/completions";

  std::string last_error;
  for (int attempt = 0; attempt <= cfg_.max_retries; ++attempt) {
    if (attempt > 0 && cfg_.retry_backoff_ms > 0) {
      std::this_thread::sleep_for(std::chrono::milliseconds(cfg_.retry_backoff_ms << (attempt - 1)));
    }
    const auto res = client.Post(path, headers, payload, "application/json");
    if (!res) {
      last_error = httplib::to_string(res.error());
      continue;
    }
    if (res->status == 429 || res->status >= 500) {
      last_error = "HTTP " + std::to_string(res->status);
      continue;
    }
    if (res->status != 200) {
      throw TransportError(Stage::semantics, "endpoint answered HTTP " +
                                                 std::to_string(res->status) + ": " +
                                                 res->body.substr(0, 200));
    }
    std::string content;
    try {
      const auto j = nlohmann::json::parse(res->body);
      content = j.at("choices").at(0).at("message").at("content").get<std::string>();
    } catch (const nlohmann::json::exception& e) {
      throw TransportError(Stage::semantics,
                           std::string("malformed chat-completions response: ") + e.what());
    }
    content = trim(content);
    if (content.empty()) throw EmptyDescriptionError(Stage::semantics, "endpoint returned an empty completion");
    return content;
  }
  throw TransportError(Stage::semantics, "request to " + cfg_.base_url + " failed after " +
                                             std::to_string(cfg_.max_retries + 1) +
                                             " attempts: " + last_error);
}

std::string describe_value(const LlmEndpointConfig& cfg, const std::string& prompt) {
  HttpLlm llm(cfg);
  return llm.describe(prompt, {}, {}, {});
}

// ---------------------------------------------------------------- enrichment

EnrichReport enrich_vocabulary(const Dataset& ds, const Vocabulary& vocab,
                               DescriptionSource& source, const PromptSpec& spec,
                               DescriptionCache& cache, const EnrichOptions& options) {
  if (vocab.size() == 0) throw ContractViolation(Stage::semantics, "vocabulary is empty");

  EnrichReport report;
  report.vocab_size = vocab.size();
  report.records.resize(vocab.size());

  struct Job {
    std::size_t id;
    std::string prompt;
    std::string hash;
  };
  std::vector<Job> pending;
  const std::string model = source.model();
  for (std::size_t id = 0; id < vocab.size(); ++id) {
    const auto& entry = vocab.entries[id];
    const auto& attr = ds.attributes.at(entry.attribute);
    Job job{id, build_prompt(entry.value, attr.name, attr.domain, spec), {}};
    job.hash = sha256_hex(job.prompt);
    if (auto hit = cache.find(attr.name, entry.value, model, job.hash)) {
      report.records[id] = std::move(*hit);
      ++report.cache_hits;
    } else {
      pending.push_back(std::move(job));
    }
  }

  std::atomic<std::size_t> next{0};
  std::atomic<std::size_t> queries{0};
  std::atomic<std::size_t> completed{0};
  std::atomic<bool> stop{false};
  std::mutex report_mutex;
  std::string first_error;

  auto worker = [&] {
    for (;;) {
      if (stop.load()) return;
      const std::size_t slot = next.fetch_add(1);
      if (slot >= pending.size()) return;
      const Job& job = pending[slot];
      const auto& entry = vocab.entries[job.id];
      const auto& attr = ds.attributes[entry.attribute];
      try {
        std::string text;
        for (int attempt = 0;; ++attempt) {
          ++queries;
          try {
            text = trim(source.describe(job.prompt, entry.value, attr.name, attr.domain));
            if (text.empty()) {
              throw EmptyDescriptionError(Stage::semantics, "empty completion");
            }
            break;
          } catch (const EmptyDescriptionError&) {
            if (attempt >= 1) throw; // one re-query, then give up
          }
        }
        DescriptionRecord rec{attr.name, entry.value, std::move(text), model, job.hash,
                              utc_timestamp()};
        cache.append(rec);
        ++completed;
        std::lock_guard lock(report_mutex);
        report.records[job.id] = std::move(rec);
      } catch (const Error& e) {
        std::lock_guard lock(report_mutex);
        report.failures.push_back(attr.name + "=" + entry.value + ": " + e.what());
        if (!options.best_effort) {
          if (first_error.empty()) first_error = e.what();
          stop = true;
        }
      }
    }
  };

  const std::size_t threads = std::clamp<std::size_t>(options.parallelism, 1, std::max<std::size_t>(pending.size(), 1));
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(worker);
  }
  report.queries = queries.load();

  if (!first_error.empty()) {
    const std::size_t done = report.cache_hits + completed.load();
    throw EnrichmentError("enrichment aborted (" + std::to_string(done) + " of " +
                              std::to_string(vocab.size()) + " values described, " +
                              std::to_string(vocab.size() - done) + " remaining): " + first_error,
                          done, vocab.size() - done);
  }
  return report;
}

double amortization_ratio(std::size_t n, std::size_t m, std::size_t vocab_size) {
  if (n == 0 || m == 0) throw ContractViolation(Stage::semantics, "amortization ratio needs N, M >= 1");
  if (vocab_size == 0) throw ContractViolation(Stage::semantics, "amortization ratio needs |V| >= 1");
  return 1.0 - static_cast<double>(vocab_size) /
                   (static_cast<double>(n) * static_cast<double>(m));
}

std::string utc_timestamp() {
  std::time_t t;
  if (const char* epoch = std::getenv("SOURCE_DATE_EPOCH"); epoch && *epoch) {
    t = static_cast<std::time_t>(std::strtoll(epoch, nullptr, 10));
  } else {
    t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  }
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

} // namespace arise
