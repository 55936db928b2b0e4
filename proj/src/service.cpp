#include "toklab/service.hpp"

#include <algorithm>
#include <map>

#include "httplib.h"
#include "json.hpp"
#include "toklab/error.hpp"
#include "toklab/harness.hpp"
#include "toklab/tokfile.hpp"

namespace toklab {

namespace {

using nlohmann::json;
using nlohmann::ordered_json;

struct HttpError {
  int status;
  std::string message;
  ordered_json extra = ordered_json::object();
};

ApiResponse error_response(const HttpError& e) {
  ordered_json body;
  body["error"] = e.message;
  for (const auto& [k, v] : e.extra.items()) body[k] = v;
  return {e.status, body.dump()};
}

json parse_body(std::string_view body) {
  try {
    json doc = json::parse(body);
    if (!doc.is_object()) throw HttpError{422, "request body must be a JSON object"};
    return doc;
  } catch (const json::parse_error& e) {
    throw HttpError{422, std::string("malformed JSON: ") + e.what()};
  }
}

std::vector<std::string> string_list(const json& doc, const char* field) {
  const auto it = doc.find(field);
  if (it == doc.end() || !it->is_array()) {
    throw HttpError{422, std::string("field '") + field + "' must be an array of strings"};
  }
  std::vector<std::string> out;
  for (const json& v : *it) {
    if (!v.is_string()) throw HttpError{422, std::string("field '") + field + "' must contain only strings"};
    out.push_back(v.get<std::string>());
  }
  return out;
}

std::vector<const TokenizerModel*> resolve(const TokenizerRegistry& registry,
                                           const std::vector<std::string>& names) {
  if (names.empty()) throw HttpError{422, "field 'tokenizers' must name at least one tokenizer"};
  std::vector<const TokenizerModel*> models;
  for (const std::string& name : names) {
    const TokenizerModel* m = registry.find(name);
    if (!m) {
      throw HttpError{400, "unknown tokenizer '" + name + "'", {{"valid_tokenizers", registry.names()}}};
    }
    if (std::find(models.begin(), models.end(), m) == models.end()) models.push_back(m);
  }
  return models;
}

ordered_json breakdown_json(const TokenBreakdown& breakdown) {
  ordered_json items = ordered_json::array();
  for (const BreakdownItem& item : breakdown.items) {
    items.push_back({{"display", item.display},
                     {"id", item.id},
                     {"byte_span", {item.span.begin, item.span.end}},
                     {"kind", std::string(to_string(item.kind))}});
  }
  return items;
}

template <typename F>
ApiResponse guarded(F&& f) {
  try {
    return f();
  } catch (const HttpError& e) {
    return error_response(e);
  } catch (const Error& e) {
    return error_response({422, e.what(), {{"kind", std::string(to_string(e.kind()))}}});
  } catch (const std::exception& e) {
    return error_response({500, e.what()});
  }
}

}  // namespace

TokenizerRegistry::TokenizerRegistry(std::vector<TokenizerModel> models) : models_(std::move(models)) {
  if (models_.empty()) throw Error(ErrorKind::kInvalidArgument, "tokenizer registry is empty");
  std::sort(models_.begin(), models_.end(),
            [](const TokenizerModel& a, const TokenizerModel& b) { return a.name() < b.name(); });
  for (std::size_t i = 1; i < models_.size(); ++i) {
    if (models_[i].name() == models_[i - 1].name()) {
      throw Error(ErrorKind::kInvalidArgument, "duplicate tokenizer name '" + models_[i].name() + "'");
    }
  }
}

TokenizerRegistry TokenizerRegistry::load_directory(const std::filesystem::path& dir) {
  std::error_code ec;
  if (!std::filesystem::is_directory(dir, ec)) {
    throw Error(ErrorKind::kIoFailure, "tokenizer directory " + dir.string() + " is not readable");
  }
  std::vector<std::filesystem::path> files;
  for (const auto& entry : std::filesystem::directory_iterator(dir, ec)) {
    if (entry.is_regular_file() && entry.path().extension() == ".json") files.push_back(entry.path());
  }
  if (ec) throw Error(ErrorKind::kIoFailure, "cannot list " + dir.string() + ": " + ec.message());
  if (files.empty()) throw Error(ErrorKind::kIoFailure, "no tokenizer files (*.json) in " + dir.string());
  std::sort(files.begin(), files.end());
  std::vector<TokenizerModel> models;
  for (const auto& file : files) models.push_back(load(file));
  return TokenizerRegistry(std::move(models));
}

const TokenizerModel* TokenizerRegistry::find(std::string_view name) const {
  const auto it = std::lower_bound(models_.begin(), models_.end(), name,
                                   [](const TokenizerModel& m, std::string_view n) { return m.name() < n; });
  return it != models_.end() && it->name() == name ? &*it : nullptr;
}

std::vector<std::string> TokenizerRegistry::names() const {
  std::vector<std::string> out;
  for (const TokenizerModel& m : models_) out.push_back(m.name());
  return out;
}

ApiResponse Api::tokenizers() const {
  ordered_json out = ordered_json::array();
  for (const TokenizerModel& m : registry_.models()) {
    out.push_back({{"name", m.name()},
                   {"vocab_size", m.vocab_size()},
                   {"algorithm", std::string(to_string(m.algorithm()))},
                   {"fallback", std::string(to_string(m.fallback()))}});
  }
  return {200, out.dump()};
}

ApiResponse Api::tokenize(std::string_view body) const {
  return guarded([&]() -> ApiResponse {
    const json doc = parse_body(body);
    const auto text = doc.find("text");
    if (text == doc.end() || !text->is_string()) throw HttpError{422, "field 'text' must be a string"};
    const std::string& s = text->get_ref<const std::string&>();
    if (s.size() > options_.max_text_bytes) {
      throw HttpError{413, "text is " + std::to_string(s.size()) + " bytes; limit is " +
                               std::to_string(options_.max_text_bytes)};
    }
    const auto models = resolve(registry_, string_list(doc, "tokenizers"));
    ordered_json results = ordered_json::array();
    for (const TokenizerModel* m : models) {
      const TokenBreakdown breakdown = token_breakdown(*m, s);
      results.push_back({{"name", m->name()},
                         {"token_count", breakdown.items.size()},
                         {"source_text", breakdown.source_text},
                         {"breakdown", breakdown_json(breakdown)}});
    }
    ordered_json out;
    out["results"] = std::move(results);
    return {200, out.dump()};
  });
}

ApiResponse Api::compare(std::string_view body) const {
  return guarded([&]() -> ApiResponse {
    const json doc = parse_body(body);
    const std::vector<std::string> texts = string_list(doc, "texts");
    if (texts.empty()) throw HttpError{422, "field 'texts' must contain at least one text"};
    std::size_t total = 0;
    for (const std::string& t : texts) total += t.size();
    if (total > options_.max_text_bytes) {
      throw HttpError{413, "texts total " + std::to_string(total) + " bytes; limit is " +
                               std::to_string(options_.max_text_bytes)};
    }
    const auto models = resolve(registry_, string_list(doc, "tokenizers"));

    std::string baseline_name(kCodepointBaseline);
    if (const auto it = doc.find("baseline"); it != doc.end() && !it->is_null()) {
      if (!it->is_string()) throw HttpError{422, "field 'baseline' must be a string"};
      baseline_name = it->get<std::string>();
    }
    Baseline baseline = Baseline::codepoints();
    if (baseline_name != kCodepointBaseline) {
      const TokenizerModel* m = registry_.find(baseline_name);
      if (!m) {
        std::vector<std::string> valid = registry_.names();
        valid.emplace_back(kCodepointBaseline);
        throw HttpError{400, "unknown baseline '" + baseline_name + "'", {{"valid_tokenizers", valid}}};
      }
      baseline = Baseline::of(*m);
    }

    bool fixed_clock = false;
    if (const auto it = doc.find("fixed_clock"); it != doc.end()) {
      if (!it->is_boolean()) throw HttpError{422, "field 'fixed_clock' must be a boolean"};
      fixed_clock = it->get<bool>();
    }
    ComparisonOptions opts;
    opts.workers = options_.workers;
    opts.fixed_clock = fixed_clock;
    const Corpus corpus = Corpus::from_texts(texts, "api");
    return {200, report_to_json(run_comparison(models, baseline, corpus, opts))};
  });
}

struct Server::Impl {
  Impl(const TokenizerRegistry& registry, ServiceOptions options) : api(registry, std::move(options)) {}
  Api api;
  httplib::Server http;
};

Server::Server(const TokenizerRegistry& registry, ServiceOptions options)
    : impl_(std::make_unique<Impl>(registry, std::move(options))) {
  httplib::Server& http = impl_->http;
  const Api& api = impl_->api;
  const ServiceOptions& opts = api.options();

  http.set_read_timeout(opts.request_timeout);
  http.set_write_timeout(opts.request_timeout);
  // Leave room for JSON escaping so oversize text still reaches the 413 check.
  http.set_payload_max_length(opts.max_text_bytes * 8 + 64 * 1024);
  // httplib's default adds SO_REUSEPORT, which lets a second server share a
  // busy port instead of failing to bind.
  http.set_socket_options([](socket_t sock) {
    int yes = 1;
    setsockopt(sock, SOL_SOCKET, SO_REUSEADDR, &yes, sizeof(yes));
  });

  const auto reply = [](httplib::Response& res, const ApiResponse& r) {
    res.status = r.status;
    res.set_content(r.body, "application/json");
  };
  http.Get("/api/tokenizers", [&api, reply](const httplib::Request&, httplib::Response& res) {
    reply(res, api.tokenizers());
  });
  http.Post("/api/tokenize", [&api, reply](const httplib::Request& req, httplib::Response& res) {
    reply(res, api.tokenize(req.body));
  });
  http.Post("/api/compare", [&api, reply](const httplib::Request& req, httplib::Response& res) {
    reply(res, api.compare(req.body));
  });

  if (opts.dev_cors) {
    const std::string origin = opts.cors_origin;
    http.set_post_routing_handler([origin](const httplib::Request&, httplib::Response& res) {
      res.set_header("Access-Control-Allow-Origin", origin);
      res.set_header("Access-Control-Allow-Methods", "GET, POST, OPTIONS");
      res.set_header("Access-Control-Allow-Headers", "Content-Type");
    });
    http.Options(R"(/api/.*)", [](const httplib::Request&, httplib::Response& res) { res.status = 204; });
  }

  if (opts.static_dir && !http.set_mount_point("/", opts.static_dir->string())) {
    throw Error(ErrorKind::kIoFailure, "static directory " + opts.static_dir->string() + " is not readable");
  }
}

Server::~Server() { stop(); }

int Server::bind(const std::string& host, int port) {
  if (port == 0) {
    const int bound = impl_->http.bind_to_any_port(host);
    if (bound < 0) throw Error(ErrorKind::kIoFailure, "cannot bind " + host);
    return bound;
  }
  if (!impl_->http.bind_to_port(host, port)) {
    throw Error(ErrorKind::kIoFailure, "cannot bind " + host + ":" + std::to_string(port));
  }
  return port;
}

void Server::listen() { impl_->http.listen_after_bind(); }

void Server::stop() {
  if (impl_) impl_->http.stop();
}

void Server::wait_until_ready() const { impl_->http.wait_until_ready(); }

}  // namespace toklab
