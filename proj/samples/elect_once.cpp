// Runs a single election on a star and prints the transcript.

#include <iostream>

#include "d2le/analysis.hpp"
#include "d2le/election.hpp"
#include "d2le/graph.hpp"

int main() {
  const d2le::Graph star = d2le::generate({d2le::Family::Star, 6}, 0);
  const d2le::IdAssignment ids{{60, 4, 2, 9, 7, 3}};

  const auto outcome = d2le::elect(star, ids, d2le::TrialSeed{42, 0}, {.record_transcript = true});
  std::cout << "leader node " << *outcome.leader << " (id " << ids[*outcome.leader] << "), "
            << outcome.candidates.size() << " candidates, " << outcome.ledger.total << " messages\n";
  std::cout << "expected messages " << d2le::bound_report(star).exact_expected_messages << "\n\n";
  d2le::write_transcript(std::cout, *outcome.transcript);
}
