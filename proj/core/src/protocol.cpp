#include <cmath>
#include <json.hpp>

#include "idiomspace/errors.hpp"
#include "idiomspace/providers.hpp"

namespace idiomspace::providers {

using nlohmann::json;

const char* to_string(ProbeKind kind) {
  return kind == ProbeKind::embed ? "embed" : "condprob";
}

namespace {

json parse_line(std::string_view line) {
  try {
    json j = json::parse(line);
    if (!j.is_object()) throw ProtocolError("protocol record is not an object");
    return j;
  } catch (const json::exception& e) {
    throw ProtocolError(std::string("malformed protocol record: ") + e.what());
  }
}

template <typename T>
T field(const json& j, const char* name) {
  auto it = j.find(name);
  if (it == j.end()) throw ProtocolError(std::string("protocol record lacks '") + name + "'");
  try {
    return it->get<T>();
  } catch (const json::exception&) {
    throw ProtocolError(std::string("protocol field '") + name + "' has the wrong type");
  }
}

double finite(double v, const char* what) {
  if (!std::isfinite(v)) throw ProtocolError(std::string("non-finite ") + what);
  return v;
}

}  // namespace

std::string encode(const ProbeRequest& r) {
  json j;
  j["id"] = r.id;
  j["kind"] = to_string(r.kind);
  j["tokens"] = r.tokens;
  j["mask"] = r.mask;
  j["target_index"] = r.target_index;
  j["params"] = r.params;
  return j.dump();
}

std::string encode(const ProbeResponse& r) {
  json j;
  j["id"] = r.id;
  j["ok"] = r.ok;
  if (!r.ok) {
    j["error"] = r.error;
  } else if (r.vector) {
    j["vector"] = *r.vector;
  } else if (r.logprob) {
    j["logprob"] = *r.logprob;
  }
  return j.dump();
}

std::string encode(const Handshake& h) {
  json j;
  j["dimension"] = h.dimension;
  j["provider_name"] = h.provider_name;
  j["config_fingerprint"] = h.config_fingerprint;
  return j.dump();
}

ProbeRequest decode_request(std::string_view line) {
  const json j = parse_line(line);
  ProbeRequest r;
  r.id = field<std::uint64_t>(j, "id");
  const auto kind = field<std::string>(j, "kind");
  if (kind == "embed") {
    r.kind = ProbeKind::embed;
  } else if (kind == "condprob") {
    r.kind = ProbeKind::condprob;
  } else {
    throw ProtocolError("unknown request kind '" + kind + "'");
  }
  r.tokens = field<std::vector<std::string>>(j, "tokens");
  if (j.contains("mask")) {
    r.mask = field<std::vector<bool>>(j, "mask");
  } else {
    r.mask.assign(r.tokens.size(), false);
  }
  r.target_index = field<std::size_t>(j, "target_index");
  if (j.contains("params")) {
    const auto params = field<json>(j, "params");
    if (!params.is_object()) throw ProtocolError("request params must be an object");
    for (const auto& [k, v] : params.items()) {
      r.params[k] = v.is_string() ? v.get<std::string>() : v.dump();
    }
  }
  return r;
}

ProbeResponse decode_response(std::string_view line) {
  const json j = parse_line(line);
  ProbeResponse r;
  r.id = field<std::uint64_t>(j, "id");
  r.ok = field<bool>(j, "ok");
  if (!r.ok) {
    r.error = j.contains("error") ? field<std::string>(j, "error") : "unspecified provider error";
    return r;
  }
  if (j.contains("vector")) {
    const json& v = j["vector"];
    if (!v.is_array()) throw ProtocolError("protocol field 'vector' has the wrong type");
    std::vector<double> out;
    out.reserve(v.size());
    for (const auto& x : v) {
      if (!x.is_number()) throw ProtocolError("non-finite or non-numeric vector component");
      out.push_back(finite(x.get<double>(), "vector component"));
    }
    r.vector = std::move(out);
  } else if (j.contains("logprob")) {
    if (!j["logprob"].is_number()) throw ProtocolError("non-finite or non-numeric logprob");
    r.logprob = finite(j["logprob"].get<double>(), "logprob");
  } else {
    throw ProtocolError("ok response carries neither 'vector' nor 'logprob'");
  }
  return r;
}

Handshake decode_handshake(std::string_view line) {
  const json j = parse_line(line);
  Handshake h;
  h.dimension = field<std::size_t>(j, "dimension");
  h.provider_name = field<std::string>(j, "provider_name");
  h.config_fingerprint = field<std::string>(j, "config_fingerprint");
  if (h.dimension == 0) throw ProtocolError("handshake declares dimension 0");
  return h;
}

void validate(const ProbeRequest& r) {
  if (r.tokens.empty()) throw ContractError("probe has no tokens");
  if (r.mask.size() != r.tokens.size()) {
    throw ContractError("mask length " + std::to_string(r.mask.size()) + " != token count " +
                        std::to_string(r.tokens.size()));
  }
  if (r.target_index >= r.tokens.size()) {
    throw ContractError("target_index " + std::to_string(r.target_index) + " out of range");
  }
}

ProbeRequest make_condprob_request(std::span<const std::string> tokens,
                                   const std::vector<bool>& mask, std::size_t target_index) {
  ProbeRequest r;
  r.kind = ProbeKind::condprob;
  r.tokens.assign(tokens.begin(), tokens.end());
  r.mask = mask;
  r.target_index = target_index;
  validate(r);
  return r;
}

namespace {

void check_ok(const ProbeResponse& resp) {
  if (!resp.ok) throw ProtocolError("provider error for request " + std::to_string(resp.id) +
                                    ": " + resp.error);
}

double checked_logprob(const ProbeResponse& resp) {
  check_ok(resp);
  if (!resp.logprob) throw ProtocolError("condprob response lacks a logprob");
  if (*resp.logprob > 0.0) {
    throw ProtocolError("provider returned positive log-probability " +
                        std::to_string(*resp.logprob));
  }
  return *resp.logprob;
}

}  // namespace

ProbeRequest make_embed_request(std::span<const std::string> tokens, std::size_t target_index) {
  ProbeRequest r;
  r.kind = ProbeKind::embed;
  r.tokens.assign(tokens.begin(), tokens.end());
  r.mask.assign(r.tokens.size(), false);
  r.target_index = target_index;
  validate(r);
  return r;
}

std::vector<EmbeddingVector> request_embeddings(Provider& provider,
                                                std::span<const ProbeRequest> batch) {
  for (const auto& r : batch) {
    validate(r);
    if (r.kind != ProbeKind::embed) throw ContractError("request_embeddings given a condprob probe");
  }
  const auto hs = provider.handshake();
  auto resp = provider.submit(batch);
  if (resp.size() != batch.size()) throw ProtocolError("provider returned a short batch");
  std::vector<EmbeddingVector> out;
  out.reserve(resp.size());
  for (auto& r : resp) {
    check_ok(r);
    if (!r.vector) throw ProtocolError("embed response lacks a vector");
    if (r.vector->size() != hs.dimension) {
      throw ProtocolError("embedding dimension " + std::to_string(r.vector->size()) +
                          " differs from the handshake's " + std::to_string(hs.dimension));
    }
    out.push_back(EmbeddingVector{std::move(*r.vector), hs.provenance()});
  }
  return out;
}

EmbeddingVector request_embedding(Provider& provider, std::span<const std::string> tokens,
                                  std::size_t target_index) {
  const ProbeRequest r = make_embed_request(tokens, target_index);
  return std::move(request_embeddings(provider, std::span<const ProbeRequest>(&r, 1)).front());
}

double request_condprob(Provider& provider, std::span<const std::string> tokens,
                        const std::vector<bool>& mask, std::size_t target_index) {
  const ProbeRequest r = make_condprob_request(tokens, mask, target_index);
  return request_condprobs(provider, std::span<const ProbeRequest>(&r, 1)).front();
}

std::vector<double> request_condprobs(Provider& provider, std::span<const ProbeRequest> batch) {
  for (const auto& r : batch) validate(r);
  auto resp = provider.submit(batch);
  if (resp.size() != batch.size()) throw ProtocolError("provider returned a short batch");
  std::vector<double> out;
  out.reserve(resp.size());
  for (const auto& r : resp) out.push_back(checked_logprob(r));
  return out;
}

std::string answer_line(Provider& provider, std::string_view line) {
  ProbeResponse err;
  err.ok = false;
  try {
    // Recover the id first so that even rejected requests can be correlated.
    json j = json::parse(line, nullptr, false);
    if (j.is_object() && j.contains("id") && j["id"].is_number_unsigned()) {
      err.id = j["id"].get<std::uint64_t>();
    }
    const ProbeRequest req = decode_request(line);
    validate(req);
    auto resp = provider.submit(std::span<const ProbeRequest>(&req, 1));
    if (resp.size() != 1) throw ProtocolError("provider returned a short batch");
    resp[0].id = req.id;
    return encode(resp[0]);
  } catch (const std::exception& e) {
    err.error = e.what();
    return encode(err);
  }
}

void serve(Provider& provider, Transport& transport) {
  transport.write_line(encode(provider.handshake()));
  while (auto line = transport.read_line()) {
    if (line->empty()) continue;
    transport.write_line(answer_line(provider, *line));
  }
  transport.close_write();
}

ProviderDescriptor parse_descriptor(std::string_view text) {
  const auto colon = text.find(':');
  if (colon == std::string_view::npos || colon + 1 >= text.size()) {
    throw ConfigError("provider descriptor must be toy:<path>, subprocess:<command> or "
                      "socket:<path>, got '" + std::string(text) + "'");
  }
  const auto scheme = text.substr(0, colon);
  ProviderDescriptor d;
  d.argument = std::string(text.substr(colon + 1));
  if (scheme == "toy") {
    d.kind = ProviderDescriptor::Kind::toy;
  } else if (scheme == "subprocess") {
    d.kind = ProviderDescriptor::Kind::subprocess;
  } else if (scheme == "socket") {
    d.kind = ProviderDescriptor::Kind::socket;
  } else {
    throw ConfigError("unknown provider scheme '" + std::string(scheme) + "'");
  }
  return d;
}

}  // namespace idiomspace::providers
