// Copyright 2026 The docie Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Stand-alone scorer speaking the line protocol over stdio or HTTP, backed by
// one of the built-in mocks. Used by the end-to-end tests and handy for
// exercising a pipeline without a model.

#include <iostream>
#include <memory>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "httplib.h"

#include "docie/dataset_io.hpp"
#include "docie/scorers.hpp"
#include "docie/transport.hpp"

int main(int argc, char** argv) {
  CLI::App app("Mock scorer speaking the docie line protocol", "docie_mock_scorer");
  std::string dataset_path;
  std::string adapter = "canonical";
  std::string kind = "gold";
  double drop = 0.0;
  std::uint64_t seed = 0;
  double value = 0.0;
  std::string question_template(docie::qa::kDefaultTemplate);
  std::string transport = "stdio";
  std::string host = "127.0.0.1";
  int port = 0;
  std::vector<double> f1_sequence;

  app.add_option("--dataset", dataset_path, "Dataset holding the gold annotations");
  app.add_option("--adapter", adapter, "Dataset adapter")->capture_default_str();
  app.add_option("--scorer", kind, "gold | noisy | constant")->capture_default_str();
  app.add_option("--drop", drop, "noisy: probability of dropping each gold entity")->capture_default_str();
  app.add_option("--seed", seed, "noisy: seed for the drop decisions")->capture_default_str();
  app.add_option("--value", value, "constant: logit emitted everywhere")->capture_default_str();
  app.add_option("--template", question_template, "Question template used to map questions back to labels")
      ->capture_default_str();
  app.add_option("--transport", transport, "stdio | http")->capture_default_str();
  app.add_option("--host", host, "http: bind address")->capture_default_str();
  app.add_option("--port", port, "http: port (0 picks a free one and prints it)")->capture_default_str();
  app.add_option("--f1-sequence", f1_sequence, "Validation f1 reported per epoch for schedule messages");
  CLI11_PARSE(app, argc, argv);

  std::unique_ptr<docie::mock::ScriptedTrainer> scorer;
  try {
    if (kind == "constant") {
      scorer = std::make_unique<docie::mock::Constant>(value);
    } else {
      if (dataset_path.empty()) throw std::invalid_argument("--dataset is required for the " + kind + " scorer");
      auto ds = std::make_shared<const docie::Dataset>(docie::load(dataset_path, docie::parse_adapter(adapter)));
      if (kind == "gold") {
        scorer = std::make_unique<docie::mock::GoldOracle>(ds, question_template);
      } else if (kind == "noisy") {
        scorer = std::make_unique<docie::mock::NoisyOracle>(ds, drop, seed, question_template);
      } else {
        throw std::invalid_argument("unknown --scorer '" + kind + "'");
      }
    }
  } catch (const std::exception& e) {
    std::cerr << "docie_mock_scorer: " << e.what() << "\n";
    return 1;
  }
  scorer->set_f1_script(f1_sequence);

  if (transport == "stdio") {
    std::ios::sync_with_stdio(false);
    docie::transport::serve_stream(*scorer, std::cin, std::cout);
    return 0;
  }
  if (transport != "http") {
    std::cerr << "docie_mock_scorer: unknown --transport '" << transport << "'\n";
    return 2;
  }
  httplib::Server server;
  docie::transport::install_http_handler(server, *scorer);
  if (port == 0) port = server.bind_to_any_port(host);
  else if (!server.bind_to_port(host, port)) port = -1;
  if (port < 0) {
    std::cerr << "docie_mock_scorer: cannot bind " << host << "\n";
    return 1;
  }
  std::cout << "listening on http://" << host << ":" << port << "/score" << std::endl;
  return server.listen_after_bind() ? 0 : 1;
}
