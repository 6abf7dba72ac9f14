#include "commands.hpp"

#include "stumpforge/config.hpp"
#include "stumpforge/error.hpp"
#include "stumpforge/fit_report.hpp"
#include "stumpforge/reports.hpp"
#include "stumpforge/retrieval.hpp"
#include "stumpforge/scoring.hpp"
#include "stumpforge/service.hpp"
#include "stumpforge/simulate.hpp"
#include "stumpforge/store.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <ostream>
#include <sstream>

namespace stumpforge::cli {

namespace {

namespace fs = std::filesystem;

struct IndexBuildArgs {
  std::string corpus, out, stopwords;
};
struct IndexQueryArgs {
  std::string index, question;
  std::size_t k = 5;
};
struct FitArgs {
  std::string matrix, subjects, out;
  std::uint64_t seed = 0;
  int epochs = irt::FitConfig{}.epochs;
  int mc_samples = irt::FitConfig{}.mc_samples;
  double learning_rate = irt::FitConfig{}.learning_rate;
};
struct ScoreArgs {
  std::string fit, questions, out_dir = ".";
};
struct ReportArgs {
  std::string fit, matrix, subjects, annotations, verdicts, row, col;
  std::vector<std::string> systems;
  double t = 0.0;
  std::size_t buckets = 4;
  bool percent = false;
};
struct ServeArgs {
  std::string config;
  int port = 0;
};
struct SimulateArgs {
  simulate::SyntheticConfig config;
  std::string out_dir = ".";
};

LoadedFit load_fit(const std::string& path) { return fit_from_json(json::parse(read_file(path))); }

ResponseMatrix load_matrix(const std::string& matrix, const std::string& subjects) {
  std::vector<Subject> known;
  if (!subjects.empty()) known = read_subjects(subjects);
  return read_matrix_csv_file(matrix, known);
}

void write_text(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  write_file(path, text);
}

void index_build(const IndexBuildArgs& a, std::ostream& out) {
  retrieval::IndexConfig config;
  if (!a.stopwords.empty()) config.stopwords = retrieval::read_stopwords(a.stopwords);
  const auto index = retrieval::InvertedIndex::build(retrieval::read_corpus(a.corpus), config);
  write_text(a.out, index.serialize());
  out << "indexed " << index.documents().size() << " documents, " << index.sentence_count()
      << " sentences, " << index.vocabulary().size() << " terms\n";
}

void index_query(const IndexQueryArgs& a, std::ostream& out) {
  const auto index = retrieval::InvertedIndex::deserialize(read_file(a.index));
  for (const auto& h : index.query(a.question, a.k)) {
    char score[32];
    std::snprintf(score, sizeof score, "%.6f", h.score);
    out << h.rank << '\t' << score << '\t' << h.doc_title << '\t' << h.sentence << '\n';
  }
}

void run_fit_command(const FitArgs& a, std::ostream& out) {
  irt::FitConfig config;
  config.seed = a.seed;
  config.epochs = a.epochs;
  config.mc_samples = a.mc_samples;
  config.learning_rate = a.learning_rate;
  config.validate();
  const auto matrix = load_matrix(a.matrix, a.subjects);
  const std::string report = to_json(run_fit(matrix, config)).dump(2) + "\n";
  if (a.out.empty()) out << report;
  else write_text(a.out, report);
}

void score_command(const ScoreArgs& a, std::ostream& out) {
  const auto fit = load_fit(a.fit);
  const auto metrics = reports::author_scores(fit, read_questions(a.questions));
  const fs::path dir(a.out_dir);
  write_text(dir / "scores.csv", reports::render_scores_csv(metrics));
  write_text(dir / "scores.json", reports::scores_to_json(metrics).dump(2) + "\n");
  out << reports::render_scores_table(metrics);
  out << "best answerer: " << scoring::best_answerer(fit.params) << '\n';
}

void report_quadrants(const ReportArgs& a, std::ostream& out) {
  const auto fit = load_fit(a.fit);
  if (!fit.dual) throw ValidationError("fit report has no human/machine dual table");
  out << scoring::render_quadrants(scoring::quadrants(*fit.dual, a.t));
}

void report_contingency(const ReportArgs& a, std::ostream& out) {
  const auto matrix = load_matrix(a.matrix, a.subjects);
  if (a.row.empty() != a.col.empty()) throw ValidationError("--row and --col go together");
  const auto table = a.row.empty() ? scoring::stump_contingency(matrix)
                                   : scoring::stump_contingency_pair(matrix, a.row, a.col);
  out << (a.percent ? scoring::render_percentages(table) : scoring::render_counts(table));
}

void report_tactics(const ReportArgs& a, std::ostream& out) {
  const auto fit = load_fit(a.fit);
  std::map<std::string, std::set<AdversarialTactic>> annotated;
  for (const auto& row : read_jsonl_file(a.annotations)) {
    const auto ann = store::annotation_from_json(row);
    if (!ann.tactics.empty()) annotated[row.at("question_id").get<std::string>()] = ann.tactics;
  }
  out << scoring::render_profile(scoring::tactic_discriminability_profile(annotated, fit.params, a.buckets));
}

void report_evidence(const ReportArgs& a, std::ostream& out) {
  std::vector<gateway::EvidenceVerdict> verdicts;
  for (const auto& row : read_jsonl_file(a.verdicts)) verdicts.push_back(store::verdict_from_json(row));
  out << gateway::render_evidence_utility(gateway::evidence_utility(verdicts, a.systems));
}

void serve_command(const ServeArgs& a, std::ostream& out) {
  const fs::path path = a.config.empty() ? config_path() : fs::path(a.config);
  ServiceConfig config = fs::exists(path) || !a.config.empty() ? load_config(path) : ServiceConfig{};
  if (a.port > 0) config.port = a.port;
  service::Service svc(config);
  out << "listening on " << config.host << ':' << config.port << std::endl;
  service::serve(svc, config.host, config.port);
}

void simulate_command(const SimulateArgs& a, std::ostream& out) {
  const auto data = simulate::generate(a.config);
  const fs::path dir(a.out_dir);
  fs::create_directories(dir);
  std::ostringstream matrix, subjects, questions;
  write_matrix_csv(matrix, data.matrix);
  std::vector<json> rows;
  for (const auto& s : data.subjects) rows.push_back(to_json(s));
  write_jsonl(subjects, rows);
  rows.clear();
  for (const auto& q : data.questions) rows.push_back(to_json(q));
  write_jsonl(questions, rows);
  write_text(dir / "matrix.csv", matrix.str());
  write_text(dir / "subjects.jsonl", subjects.str());
  write_text(dir / "questions.jsonl", questions.str());
  write_text(dir / "truth.json", simulate::truth_to_json(data, a.config.seed).dump(2) + "\n");
  out << "wrote " << data.subjects.size() << " subjects x " << data.questions.size()
      << " questions to " << dir.string() << '\n';
}

}  // namespace

int run(int argc, char** argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Adversarial question-writing toolkit: retrieval, IRT fitting, scoring and reports."};
  app.require_subcommand(1);

  std::function<void()> action;

  auto* index = app.add_subcommand("index", "Build or query the sentence retrieval index");
  index->require_subcommand(1);
  IndexBuildArgs build;
  auto* build_cmd = index->add_subcommand("build", "Index a corpus.jsonl");
  build_cmd->add_option("--corpus", build.corpus, "corpus.jsonl with id/title/text")->required();
  build_cmd->add_option("--out", build.out, "Index file to write")->required();
  build_cmd->add_option("--stopwords", build.stopwords, "Optional stoplist, one term per line");
  build_cmd->callback([&] { action = [&] { index_build(build, out); }; });

  IndexQueryArgs query;
  auto* query_cmd = index->add_subcommand("query", "Rank evidence sentences for a question");
  query_cmd->add_option("--index", query.index, "Index file")->required();
  query_cmd->add_option("--k", query.k, "Number of hits")->check(CLI::PositiveNumber);
  query_cmd->add_option("question", query.question, "Question text")->required();
  query_cmd->callback([&] { action = [&] { index_query(query, out); }; });

  FitArgs fit;
  auto* fit_cmd = app.add_subcommand("fit", "Fit the 2PL model to a response matrix");
  fit_cmd->add_option("--matrix", fit.matrix, "matrix.csv")->required();
  fit_cmd->add_option("--subjects", fit.subjects, "subjects.jsonl supplying subject kinds");
  fit_cmd->add_option("--seed", fit.seed, "Random seed");
  fit_cmd->add_option("--epochs", fit.epochs, "Maximum epochs");
  fit_cmd->add_option("--mc-samples", fit.mc_samples, "Monte-Carlo samples per gradient");
  fit_cmd->add_option("--learning-rate", fit.learning_rate, "Adam step size");
  fit_cmd->add_option("--out", fit.out, "Report path (stdout when omitted)");
  fit_cmd->callback([&] { action = [&] { run_fit_command(fit, out); }; });

  ScoreArgs score;
  auto* score_cmd = app.add_subcommand("score", "Score authors from a fit report");
  score_cmd->add_option("--fit", score.fit, "Fit report JSON")->required();
  score_cmd->add_option("--questions", score.questions, "questions.jsonl with authors")->required();
  score_cmd->add_option("--out-dir", score.out_dir, "Where scores.csv and scores.json go");
  score_cmd->callback([&] { action = [&] { score_command(score, out); }; });

  ReportArgs rep;
  auto* report = app.add_subcommand("report", "Render an analysis report");
  report->require_subcommand(1);
  auto* quad = report->add_subcommand("quadrants", "Human/machine difficulty clusters");
  quad->add_option("--fit", rep.fit, "Fit report JSON")->required();
  quad->add_option("--t", rep.t, "Difficulty threshold");
  quad->callback([&] { action = [&] { report_quadrants(rep, out); }; });
  auto* cont = report->add_subcommand("contingency", "Stump contingency table");
  cont->add_option("--matrix", rep.matrix, "matrix.csv")->required();
  cont->add_option("--subjects", rep.subjects, "subjects.jsonl supplying subject kinds");
  cont->add_option("--row", rep.row, "Row subject id (pair view)");
  cont->add_option("--col", rep.col, "Column subject id (pair view)");
  cont->add_flag("--percent", rep.percent, "Whole-number percentages instead of counts");
  cont->callback([&] { action = [&] { report_contingency(rep, out); }; });
  auto* tac = report->add_subcommand("tactics", "Tactic frequency by discriminability bucket");
  tac->add_option("--fit", rep.fit, "Fit report JSON")->required();
  tac->add_option("--annotations", rep.annotations, "annotations.jsonl")->required();
  tac->add_option("--buckets", rep.buckets, "Bucket count")->check(CLI::PositiveNumber);
  tac->callback([&] { action = [&] { report_tactics(rep, out); }; });
  auto* evid = report->add_subcommand("evidence-utility", "Mean evidence rubric per system");
  evid->add_option("--verdicts", rep.verdicts, "verdicts.jsonl")->required();
  evid->add_option("--systems", rep.systems, "Systems to list even without verdicts")->delimiter(',');
  evid->callback([&] { action = [&] { report_evidence(rep, out); }; });

  ServeArgs serve;
  auto* serve_cmd = app.add_subcommand("serve", "Run the HTTP service");
  serve_cmd->add_option("--config", serve.config, "Config file (default: $STUMPFORGE_CONFIG)");
  serve_cmd->add_option("--port", serve.port, "Override the configured port");
  serve_cmd->callback([&] { action = [&] { serve_command(serve, out); }; });

  SimulateArgs sim;
  auto* sim_cmd = app.add_subcommand("simulate-responses", "Sample a synthetic response matrix");
  sim_cmd->add_option("--subjects", sim.config.subjects, "Total subjects");
  sim_cmd->add_option("--machines", sim.config.machines, "How many of the subjects are machines");
  sim_cmd->add_option("--questions", sim.config.questions, "Question count");
  sim_cmd->add_option("--authors", sim.config.authors, "Author count");
  sim_cmd->add_option("--min-discriminability", sim.config.min_discriminability,
                      "Lower bound for sampled discriminability");
  sim_cmd->add_option("--seed", sim.config.seed, "Random seed");
  sim_cmd->add_option("--out-dir", sim.out_dir, "Output directory");
  sim_cmd->callback([&] { action = [&] { simulate_command(sim, out); }; });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    // exit() routes help to `out` and diagnostics to `err`.
    return app.exit(e, out, err) == 0 ? 0 : 2;
  }

  try {
    action();
    return 0;
  } catch (const ValidationError& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  } catch (const json::exception& e) {
    err << "error: malformed JSON: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
}

}  // namespace stumpforge::cli
