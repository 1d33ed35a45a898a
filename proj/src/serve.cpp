#include "abmal/serve.hpp"

#include <httplib.h>

#include <json.hpp>

#include "abmal/abm.hpp"
#include "abmal/errors.hpp"
#include "abmal/information.hpp"
#include "abmal/ssvm.hpp"

namespace abmal {
namespace {

using json = nlohmann::ordered_json;

HttpReply json_reply(int status, const json& j) { return {status, "application/json", j.dump()}; }

HttpReply error_reply(int status, const std::string& message) {
  return json_reply(status, json{{"error", message}});
}

json matrix_json(const Eigen::MatrixXd& m) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

json meta_or_empty(const MatchingInstance& x, const char* key) {
  const auto it = x.meta.find(key);
  return it == x.meta.end() ? json::array() : *it;
}

}  // namespace

ServeApp::ServeApp(const Dataset& ds, ActiveConfig cfg, std::uint64_t split_seed)
    : session_(ds, std::move(cfg), split_seed) {}

HttpReply ServeApp::health() const { return json_reply(200, json{{"status", "ok"}}); }

HttpReply ServeApp::state() {
  std::lock_guard lock(mu_);
  json history = json::array();
  for (const CurveRecord& r : session_.records()) history.push_back(r.hamming_rate);
  const PoolState& st = session_.state();
  return json_reply(200, json{{"round", session_.round()},
                              {"n_labeled", st.labeled.size()},
                              {"n_pool", st.unlabeled.size()},
                              {"finished", session_.finished()},
                              {"hamming_rate_history", std::move(history)}});
}

const ServeApp::QueryView& ServeApp::current_query() {
  const ActiveSession::Query& q = session_.pending();
  const std::size_t round = session_.round() + 1;
  if (view_ && view_->round == round) return *view_;

  const ModelParams& model = session_.model();
  const MatchingInstance& x = session_.data()[q.id];
  const GameConfig& game = session_.config().train.game;
  Equilibrium eq;
  Permutation suggested;
  if (model.kind == ModelKind::Abm) {
    Prediction p = predict(model, x, game);
    suggested = std::move(p.permutation);
    eq = std::move(p.equilibrium);
  } else {
    suggested = ssvm_predict(model, x);
    eq = double_oracle_equilibrium(potentials(model, x), game);
  }
  const Eigen::VectorXd v = value_scores(eq, session_.config().include_self_information);
  json body{{"round", round},
            {"instance_id", x.id},
            {"n", x.n},
            {"boxes_t", meta_or_empty(x, "boxes_t")},
            {"boxes_t1", meta_or_empty(x, "boxes_t1")},
            {"suggested", suggested.assignment()},
            {"confidence", matrix_json(eq.adversary_marginals)},
            {"value_scores", std::vector<double>(v.data(), v.data() + v.size())},
            {"score", q.score}};
  view_ = QueryView{round, body.dump()};
  return *view_;
}

HttpReply ServeApp::query() {
  std::lock_guard lock(mu_);
  if (session_.finished()) return error_reply(410, "session finished");
  return {200, "application/json", current_query().body};
}

HttpReply ServeApp::label(const std::string& body) {
  const json req = json::parse(body, nullptr, false);
  if (req.is_discarded() || !req.is_object()) return error_reply(400, "body is not a JSON object");
  const auto id_it = req.find("instance_id");
  const auto perm_it = req.find("permutation");
  if (id_it == req.end() || !id_it->is_string()) return error_reply(400, "instance_id must be a string");
  if (perm_it == req.end() || !perm_it->is_array()) return error_reply(400, "permutation must be an array");
  std::vector<int> assignment;
  for (const json& v : *perm_it) {
    if (!v.is_number_integer()) return error_reply(400, "permutation entries must be integers");
    assignment.push_back(v.get<int>());
  }

  std::lock_guard lock(mu_);
  if (session_.finished()) return error_reply(409, "session finished");
  const ActiveSession::Query& q = session_.pending();
  const MatchingInstance& x = session_.data()[q.id];
  if (id_it->get<std::string>() != x.id) return error_reply(409, "instance_id is not the pending query");
  if (assignment.size() != x.n || !is_permutation(assignment)) {
    return error_reply(400, "permutation must be a bijection on the instance's nodes");
  }
  session_.submit(q.id, Permutation(std::move(assignment)));
  return json_reply(200, json{{"accepted", true},
                              {"next_round", session_.round() + 1},
                              {"finished", session_.finished()}});
}

HttpReply ServeApp::curve() {
  std::lock_guard lock(mu_);
  return {200, "text/csv", curve_csv(session_.records())};
}

std::vector<CurveRecord> ServeApp::records() {
  std::lock_guard lock(mu_);
  return session_.records();
}

struct HttpServer::Impl {
  explicit Impl(ServeApp& a) : app(a) {}
  ServeApp& app;
  httplib::Server server;
};

namespace {

void send(httplib::Response& res, const HttpReply& r) {
  res.status = r.status;
  res.set_content(r.body, r.content_type);
}

template <typename Fn>
httplib::Server::Handler guarded(Fn fn) {
  return [fn](const httplib::Request& req, httplib::Response& res) {
    try {
      send(res, fn(req));
    } catch (const std::exception& e) {
      send(res, error_reply(500, e.what()));
    }
  };
}

}  // namespace

HttpServer::HttpServer(ServeApp& app) : impl_(std::make_unique<Impl>(app)) {
  auto& s = impl_->server;
  s.set_socket_options([](socket_t sock) {
    int yes = 1;
    setsockopt(sock, SOL_SOCKET, SO_REUSEADDR, &yes, sizeof yes);
  });
  ServeApp* a = &impl_->app;
  s.Get("/api/health", guarded([a](const httplib::Request&) { return a->health(); }));
  s.Get("/api/state", guarded([a](const httplib::Request&) { return a->state(); }));
  s.Get("/api/query", guarded([a](const httplib::Request&) { return a->query(); }));
  s.Post("/api/label", guarded([a](const httplib::Request& req) { return a->label(req.body); }));
  s.Get("/api/curve", guarded([a](const httplib::Request&) { return a->curve(); }));
}

HttpServer::~HttpServer() { stop(); }

int HttpServer::bind(const std::string& host, int port) {
  auto& s = impl_->server;
  const int bound = port == 0 ? s.bind_to_any_port(host) : (s.bind_to_port(host, port) ? port : -1);
  if (bound < 0) throw InvalidState("cannot bind " + host + ":" + std::to_string(port));
  return bound;
}

void HttpServer::listen() { impl_->server.listen_after_bind(); }

void HttpServer::stop() {
  if (impl_) impl_->server.stop();
}

}  // namespace abmal
