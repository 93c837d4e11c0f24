#include <unistd.h>

#include <algorithm>
#include <random>
#include <thread>

#include "doctest.h"
#include "idiomspace/errors.hpp"
#include "idiomspace/oracle_lm.hpp"
#include "idiomspace/providers.hpp"

using namespace idiomspace;
using namespace idiomspace::providers;

namespace {

ProbeRequest random_request(std::mt19937_64& rng) {
  static const std::vector<std::string> words = {"a", "the", "beans", "\"quoted\"", "tab\there",
                                                 "ünï", "x y"};
  ProbeRequest r;
  r.id = rng();
  r.kind = rng() % 2 ? ProbeKind::embed : ProbeKind::condprob;
  const std::size_t n = 1 + rng() % 8;
  for (std::size_t i = 0; i < n; ++i) {
    r.tokens.push_back(words[rng() % words.size()]);
    r.mask.push_back(rng() % 2);
  }
  r.target_index = rng() % n;
  if (rng() % 2) r.params["layer"] = std::to_string(rng() % 12);
  return r;
}

struct Pipe {
  int fds[2];
  Pipe() { REQUIRE(::pipe(fds) == 0); }
};

/// Two transports joined back to back.
std::pair<std::unique_ptr<Transport>, std::unique_ptr<Transport>> connected() {
  Pipe a, b;
  return {fd_transport(a.fds[0], b.fds[1]), fd_transport(b.fds[0], a.fds[1])};
}

/// Answers every batch of `n` requests in reverse order. Responses echo the
/// target index: the logprob is -(target / 1000), the vector is all target.
void reversing_server(Transport& t, std::size_t dimension, std::size_t n) {
  t.write_line(encode(Handshake{dimension, "fake", "f00"}));
  while (true) {
    std::vector<ProbeRequest> got;
    while (got.size() < n) {
      auto line = t.read_line();
      if (!line) break;
      got.push_back(decode_request(*line));
    }
    std::reverse(got.begin(), got.end());
    for (const auto& r : got) {
      ProbeResponse resp;
      resp.id = r.id;
      resp.ok = true;
      if (r.kind == ProbeKind::embed) {
        resp.vector = std::vector<double>(dimension, static_cast<double>(r.target_index));
      } else {
        resp.logprob = -static_cast<double>(r.target_index) / 1000.0;
      }
      t.write_line(encode(resp));
    }
    if (got.size() < n) break;
  }
  t.close_write();
}

}  // namespace

TEST_SUITE("providers") {

TEST_CASE("request and response encodings round-trip") {
  std::mt19937_64 rng(11);
  for (int i = 0; i < 500; ++i) {
    const auto r = random_request(rng);
    CHECK(decode_request(encode(r)) == r);
    ProbeResponse resp;
    resp.id = rng();
    resp.ok = i % 3 != 0;
    if (!resp.ok) {
      resp.error = "boom " + std::to_string(i);
    } else if (i % 2) {
      resp.vector = std::vector<double>{std::ldexp(1.0, -i % 60), -0.1, 1e300, 0.0};
    } else {
      resp.logprob = -std::exp(-static_cast<double>(i) / 7.0);
    }
    CHECK(decode_response(encode(resp)) == resp);
  }
  const Handshake h{42, "toy-markov", "abc123"};
  CHECK(decode_handshake(encode(h)) == h);
  CHECK(h.provenance() == "toy-markov@abc123");
}

TEST_CASE("encoded records are single lines") {
  std::mt19937_64 rng(3);
  for (int i = 0; i < 50; ++i) CHECK(encode(random_request(rng)).find('\n') == std::string::npos);
}

TEST_CASE("decoders reject malformed records") {
  CHECK_THROWS_AS(decode_request(R"({"id":1,"kind":"generate","tokens":["a"],"target_index":0})"),
                  ProtocolError);
  CHECK_THROWS_AS(decode_request("not json"), ProtocolError);
  CHECK_THROWS_AS(decode_request("[1,2]"), ProtocolError);
  CHECK_THROWS_AS(decode_request(R"({"kind":"embed","tokens":["a"],"target_index":0})"), ProtocolError);
  CHECK_THROWS_AS(decode_response(R"({"id":1,"ok":true,"logprob":"x"})"), ProtocolError);
  CHECK_THROWS_AS(decode_response(R"({"id":1,"ok":true,"vector":[1,"a"]})"), ProtocolError);
  CHECK_THROWS_AS(decode_handshake(R"({"dimension":3})"), ProtocolError);
}

TEST_CASE("request contract") {
  ProbeRequest r;
  r.tokens = {"a", "b"};
  r.mask = {false, false};
  r.target_index = 1;
  CHECK_NOTHROW(validate(r));
  r.target_index = 2;
  CHECK_THROWS_AS(validate(r), ContractError);
  r.target_index = 0;
  r.mask = {false};
  CHECK_THROWS_AS(validate(r), ContractError);
  r.tokens.clear();
  r.mask.clear();
  CHECK_THROWS_AS(validate(r), ContractError);
}

TEST_CASE("descriptors") {
  CHECK(parse_descriptor("toy:data/model.txt").kind == ProviderDescriptor::Kind::toy);
  CHECK(parse_descriptor("toy:data/model.txt").argument == "data/model.txt");
  const auto sub = parse_descriptor("subprocess:python3 -m x --flag a:b");
  CHECK(sub.kind == ProviderDescriptor::Kind::subprocess);
  CHECK(sub.argument == "python3 -m x --flag a:b");
  CHECK(parse_descriptor("socket:/tmp/s").kind == ProviderDescriptor::Kind::socket);
  CHECK_THROWS_AS(parse_descriptor("toy"), ConfigError);
  CHECK_THROWS_AS(parse_descriptor("toy:"), ConfigError);
  CHECK_THROWS_AS(parse_descriptor("http://x"), ConfigError);
}

TEST_CASE("client correlates reordered responses by id") {
  auto [client_side, server_side] = connected();
  std::thread server(reversing_server, std::ref(*server_side), 3, 8);
  {
    ProtocolClient client(std::move(client_side));
    CHECK(client.handshake().provider_name == "fake");
    std::vector<ProbeRequest> batch;
    const std::vector<std::string> toks(8, "a");
    for (std::size_t i = 0; i < 8; ++i) {
      batch.push_back(make_condprob_request(toks, std::vector<bool>(8, false), i));
      if (i % 2) batch.back() = make_embed_request(toks, i);
      batch.back().id = 100 + i;
    }
    const auto out = client.submit(batch);
    REQUIRE(out.size() == batch.size());
    for (std::size_t i = 0; i < out.size(); ++i) {
      CHECK(out[i].id == batch[i].id);
      if (batch[i].kind == ProbeKind::condprob) {
        CHECK(*out[i].logprob == -static_cast<double>(i) / 1000.0);
      } else {
        CHECK(out[i].vector->at(0) == static_cast<double>(i));
      }
    }
  }
  server.join();
}

TEST_CASE("client is usable from several threads") {
  auto [client_side, server_side] = connected();
  std::thread server(reversing_server, std::ref(*server_side), 2, 1);
  {
    ProtocolClient client(std::move(client_side));
    std::vector<std::thread> workers;
    std::atomic<int> bad{0};
    for (int w = 0; w < 4; ++w) {
      workers.emplace_back([&] {
        const std::vector<std::string> toks = {"x", "y", "z"};
        for (std::size_t i = 0; i < 50; ++i) {
          auto req = make_condprob_request(toks, {false, true, false}, i % 3);
          const auto out = client.submit(std::span(&req, 1));
          if (out.size() != 1 || out[0].logprob != -static_cast<double>(i % 3) / 1000.0) ++bad;
        }
      });
    }
    for (auto& t : workers) t.join();
    CHECK(bad == 0);
  }
  server.join();
}

TEST_CASE("peer closing mid-session is a transport error") {
  auto [client_side, server_side] = connected();
  server_side->write_line(encode(Handshake{2, "dying", "x"}));
  ProtocolClient client(std::move(client_side));
  server_side.reset();
  const std::vector<std::string> toks = {"a"};
  CHECK_THROWS_AS(request_condprob(client, toks, {false}, 0), TransportError);
}

TEST_CASE("wrappers enforce the response contract") {
  class Scripted final : public Provider {
   public:
    ProbeResponse next;
    Handshake handshake() const override { return {2, "scripted", "s"}; }
    std::vector<ProbeResponse> submit(std::span<const ProbeRequest> batch) override {
      std::vector<ProbeResponse> out;
      for (const auto& r : batch) {
        out.push_back(next);
        out.back().id = r.id;
      }
      return out;
    }
  } p;
  const std::vector<std::string> toks = {"a", "b"};
  p.next.ok = true;
  p.next.vector = std::vector<double>{1.0, 2.0, 3.0};
  CHECK_THROWS_AS(request_embedding(p, toks, 0), ProtocolError);
  p.next.vector = std::vector<double>{1.0, 2.0};
  CHECK(request_embedding(p, toks, 0).provenance == "scripted@s");
  p.next.vector.reset();
  p.next.logprob = 0.5;
  CHECK_THROWS_AS(request_condprob(p, toks, {false, false}, 1), ProtocolError);
  p.next.logprob = -0.5;
  CHECK(request_condprob(p, toks, {false, false}, 1) == -0.5);
  p.next.ok = false;
  p.next.error = "model exploded";
  try {
    request_condprob(p, toks, {false, false}, 1);
    FAIL("expected ProtocolError");
  } catch (const ProtocolError& e) {
    CHECK(std::string(e.what()).find("model exploded") != std::string::npos);
  }
}

TEST_CASE("server answers malformed and unknown requests with errors") {
  oracle_lm::ToyProvider toy(oracle_lm::MarkovModel::uniform({"a", "b"}), 1);
  auto bad = decode_response(answer_line(toy, R"({"id":7,"kind":"generate","tokens":["a"],"target_index":0})"));
  CHECK(bad.id == 7);
  CHECK_FALSE(bad.ok);
  CHECK_FALSE(decode_response(answer_line(toy, "{{{")).ok);
  auto out_of_range = decode_response(answer_line(toy, R"({"id":8,"kind":"embed","tokens":["a"],"target_index":4})"));
  CHECK(out_of_range.id == 8);
  CHECK_FALSE(out_of_range.ok);
  auto good = decode_response(answer_line(toy, R"({"id":9,"kind":"condprob","tokens":["a","b"],"mask":[false,false],"target_index":1})"));
  CHECK(good.ok);
  CHECK(*good.logprob == doctest::Approx(std::log(0.5)).epsilon(1e-12));
}

TEST_CASE("serve over a transport then a client on the other end") {
  auto [client_side, server_side] = connected();
  oracle_lm::ToyProvider toy(oracle_lm::MarkovModel::uniform({"a", "b", "c"}), 1);
  std::thread server([&] { serve(toy, *server_side); });
  {
    ProtocolClient client(std::move(client_side));
    CHECK(client.handshake() == toy.handshake());
    const std::vector<std::string> toks = {"a", "b", "c"};
    CHECK(request_condprob(client, toks, {true, false, false}, 2) ==
          doctest::Approx(std::log(1.0 / 3.0)).epsilon(1e-12));
    CHECK(request_embedding(client, toks, 1) == request_embedding(toy, toks, 1));
  }
  server.join();
}

TEST_CASE("subprocess transport talks to a child's standard streams") {
  auto t = spawn_subprocess("cat");
  t->write_line("hello");
  t->write_line("world");
  CHECK(t->read_line() == "hello");
  CHECK(t->read_line() == "world");
  t->close_write();
  CHECK_FALSE(t->read_line());
}

TEST_CASE("unreachable endpoints") {
  CHECK_THROWS_AS(connect_unix_socket("/nonexistent/dir/sock"), TransportError);
  CHECK_THROWS_AS(ProtocolClient(spawn_subprocess("exit 0")), Error);
}

}  // TEST_SUITE
