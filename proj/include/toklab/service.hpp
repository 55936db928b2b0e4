#pragma once

#include <chrono>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "toklab/model.hpp"

namespace toklab {

// Name -> model map fixed at startup. Names are file stems, ascending.
class TokenizerRegistry {
 public:
  // Throws InvalidArgument on duplicate names or an empty list.
  explicit TokenizerRegistry(std::vector<TokenizerModel> models);

  // Loads every *.json file in `dir`. Throws IoFailure if the directory is
  // unreadable or holds no tokenizer files, and rethrows load errors.
  static TokenizerRegistry load_directory(const std::filesystem::path& dir);

  const TokenizerModel* find(std::string_view name) const;
  std::vector<std::string> names() const;
  const std::vector<TokenizerModel>& models() const { return models_; }

 private:
  std::vector<TokenizerModel> models_;
};

struct ServiceOptions {
  std::size_t max_text_bytes = 64 * 1024;
  std::optional<std::filesystem::path> static_dir;
  // Adds CORS headers for the UI dev server.
  bool dev_cors = false;
  std::string cors_origin = "*";
  unsigned workers = 1;
  std::chrono::seconds request_timeout{10};
};

struct ApiResponse {
  int status = 200;
  std::string body;  // JSON
};

// Endpoint logic without the network layer. The HTTP server below routes
// straight to these.
class Api {
 public:
  Api(const TokenizerRegistry& registry, ServiceOptions options)
      : registry_(registry), options_(std::move(options)) {}

  ApiResponse tokenizers() const;
  ApiResponse tokenize(std::string_view body) const;
  ApiResponse compare(std::string_view body) const;

  const ServiceOptions& options() const { return options_; }

 private:
  const TokenizerRegistry& registry_;
  ServiceOptions options_;
};

class Server {
 public:
  Server(const TokenizerRegistry& registry, ServiceOptions options);
  ~Server();
  Server(const Server&) = delete;
  Server& operator=(const Server&) = delete;

  // Port 0 picks a free port. Returns the bound port; throws IoFailure.
  int bind(const std::string& host, int port);
  // Blocks until stop().
  void listen();
  void stop();
  void wait_until_ready() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace toklab
