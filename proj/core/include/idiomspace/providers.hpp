#ifndef IDIOMSPACE_PROVIDERS_HPP
#define IDIOMSPACE_PROVIDERS_HPP

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace idiomspace::providers {

struct EmbeddingVector {
  std::vector<double> components;
  std::string provenance;  // "<provider_name>@<config_fingerprint>"

  std::size_t dimension() const noexcept { return components.size(); }
  bool operator==(const EmbeddingVector&) const = default;
};

enum class ProbeKind { embed, condprob };
const char* to_string(ProbeKind kind);

/// One probe. For condprob the target word is always the quantity predicted,
/// whatever mask[target_index] says; all other masked words are hidden.
struct ProbeRequest {
  std::uint64_t id = 0;
  ProbeKind kind = ProbeKind::condprob;
  std::vector<std::string> tokens;
  std::vector<bool> mask;  // same length as tokens; true = hidden
  std::size_t target_index = 0;
  std::map<std::string, std::string> params;

  bool operator==(const ProbeRequest&) const = default;
};

struct ProbeResponse {
  std::uint64_t id = 0;
  bool ok = false;
  std::optional<std::vector<double>> vector;  // embed
  std::optional<double> logprob;              // condprob, natural log
  std::string error;

  bool operator==(const ProbeResponse&) const = default;
};

struct Handshake {
  std::size_t dimension = 0;
  std::string provider_name;
  std::string config_fingerprint;

  std::string provenance() const { return provider_name + "@" + config_fingerprint; }
  bool operator==(const Handshake&) const = default;
};

// Line-delimited JSON codec. Each encoded record is a single line without the
// trailing newline. Decoders throw ProtocolError on malformed input, including
// unknown request kinds and non-finite numbers.
std::string encode(const ProbeRequest& request);
std::string encode(const ProbeResponse& response);
std::string encode(const Handshake& handshake);
ProbeRequest decode_request(std::string_view line);
ProbeResponse decode_response(std::string_view line);
Handshake decode_handshake(std::string_view line);

/// Checks a request against the contract: non-empty tokens, mask length,
/// target in range. Throws ContractError.
void validate(const ProbeRequest& request);

/// In-process provider contract. Implementations must be safe to call from
/// several threads at once.
class Provider {
 public:
  virtual ~Provider() = default;

  virtual Handshake handshake() const = 0;

  /// Responses are returned in request order. Providers may answer
  /// individual failures with ok == false rather than throwing.
  virtual std::vector<ProbeResponse> submit(std::span<const ProbeRequest> batch) = 0;
};

// Convenience wrappers that check the response against the handshake:
// dimension drift or a positive log-probability raise ProtocolError, and an
// ok == false response is rethrown as ProtocolError carrying its message.
EmbeddingVector request_embedding(Provider& provider, std::span<const std::string> tokens,
                                  std::size_t target_index);
double request_condprob(Provider& provider, std::span<const std::string> tokens,
                        const std::vector<bool>& mask, std::size_t target_index);
/// Pipelined forms; results follow request order.
std::vector<double> request_condprobs(Provider& provider, std::span<const ProbeRequest> batch);
std::vector<EmbeddingVector> request_embeddings(Provider& provider,
                                                std::span<const ProbeRequest> batch);

ProbeRequest make_embed_request(std::span<const std::string> tokens, std::size_t target_index);

ProbeRequest make_condprob_request(std::span<const std::string> tokens,
                                   const std::vector<bool>& mask, std::size_t target_index);

// ---------------------------------------------------------------------------
// Transports and the wire client

/// A bidirectional line channel.
class Transport {
 public:
  virtual ~Transport() = default;
  virtual void write_line(std::string_view line) = 0;
  /// Blocks for the next line; nullopt on end of stream.
  virtual std::optional<std::string> read_line() = 0;
  /// Stops further writes; the peer sees end of stream.
  virtual void close_write() = 0;
};

/// Spawns `/bin/sh -c command` and talks to its standard streams.
std::unique_ptr<Transport> spawn_subprocess(const std::string& command);
/// Connects to a Unix-domain stream socket.
std::unique_ptr<Transport> connect_unix_socket(const std::string& path);
/// Wraps two already-open file descriptors (taken over and closed on destruction).
std::unique_ptr<Transport> fd_transport(int read_fd, int write_fd);

/// Wire-protocol client. Reads the handshake on construction, then correlates
/// pipelined responses to requests by id, so responses may come back in any
/// order. Safe for concurrent use.
class ProtocolClient final : public Provider {
 public:
  explicit ProtocolClient(std::unique_ptr<Transport> transport);
  ~ProtocolClient() override;
  ProtocolClient(const ProtocolClient&) = delete;
  ProtocolClient& operator=(const ProtocolClient&) = delete;

  Handshake handshake() const override;
  std::vector<ProbeResponse> submit(std::span<const ProbeRequest> batch) override;

 private:
  struct State;
  std::shared_ptr<State> state_;
};

/// Server side of the protocol: writes the handshake, then answers one line
/// per request until end of input. Malformed lines and unknown kinds get an
/// ok == false response carrying the request id when it can be recovered.
void serve(Provider& provider, Transport& transport);
/// Answers a single raw request line.
std::string answer_line(Provider& provider, std::string_view line);

/// Accepts up to `max_connections` clients (0 = unlimited) on a Unix socket
/// and serves each on its own thread.
void serve_unix_socket(Provider& provider, const std::string& path, std::size_t max_connections);

// ---------------------------------------------------------------------------
// Descriptors: toy:<path> | subprocess:<command> | socket:<path>

struct ProviderDescriptor {
  enum class Kind { toy, subprocess, socket };
  Kind kind = Kind::toy;
  std::string argument;
};

/// Throws ConfigError when malformed.
ProviderDescriptor parse_descriptor(std::string_view text);

struct ProviderOptions {
  std::size_t embed_window = 3;
};

std::unique_ptr<Provider> open_provider(const ProviderDescriptor& descriptor,
                                        const ProviderOptions& options = {});

}  // namespace idiomspace::providers

#endif  // IDIOMSPACE_PROVIDERS_HPP
