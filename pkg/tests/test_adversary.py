import pytest

from etsim.adversary import (AttackOutcome, GuessModel, NoCapability,
                             Observer, QuestionKnowledge,
                             execute_redirection, leaked_info_count, observe,
                             select_targets, shareable_questions)
from etsim.legacy import (QuestionStrength, SecurityQuestion, TransferStatus,
                          initiate_autodeposit, initiate_standard,
                          register_autodeposit)
from etsim.model import Money
from etsim.notify import Field


def send(world, amount=1500, contact="bob@plainmail.test",
         strength=QuestionStrength.WEAK, question="Favourite colour?",
         answer="blue", message="", name="Bobby"):
    return initiate_standard(
        world, "alice-lake", name, contact, Money(amount),
        SecurityQuestion(question, answer, strength), message)


class TestObserverLevels:
    def test_capabilities_grow_with_level(self):
        caps = []
        for level in range(2, 6):
            o = Observer.for_level(level)
            caps.append((o.read_plaintext_transit, o.read_endpoint_compromised,
                         o.read_encrypted_transit))
        for weaker, stronger in zip(caps, caps[1:]):
            assert all(not w or s for w, s in zip(weaker, stronger))

    def test_level_five_reads_encrypted_transit(self):
        assert Observer.for_level(5).read_encrypted_transit
        assert not Observer.for_level(4).read_encrypted_transit

    def test_invalid_level(self):
        with pytest.raises(ValueError):
            Observer.for_level(0)


class TestObserve:
    def test_intended_party_sees_only_its_mail(self, world):
        send(world, contact="bob@plainmail.test")
        send(world, contact="bob.auto@tlsmail.test")
        bob = Observer.for_level(1, ["bob@plainmail.test"])
        seen = observe(world.delivery_log, bob)
        assert [o.destination for o in seen] == ["bob@plainmail.test"]

    def test_intended_party_reads_own_tls_mail(self, world):
        send(world, contact="bob.auto@tlsmail.test")
        bob = Observer.for_level(1, ["bob.auto@tlsmail.test"])
        assert len(observe(world.delivery_log, bob)) == 1

    def test_level3_gets_full_field_map_from_plaintext_email(self, world):
        send(world, contact="bob@plainmail.test")
        record = world.delivery_log[-1]
        seen = observe([record], Observer.for_level(3))
        assert len(seen) == 1
        assert seen[0].fields_seen == record.notification.fields

    def test_level2_cannot_read_compromised_endpoint(self, world):
        world.emails["bob.auto@tlsmail.test"].endpoint_compromised = True
        send(world, contact="bob.auto@tlsmail.test")
        record = world.delivery_log[-1]
        assert observe([record], Observer.for_level(2)) == []
        assert len(observe([record], Observer.for_level(3))) == 1

    def test_level5_reads_tls_protected_email(self, world):
        send(world, contact="bob.auto@tlsmail.test")
        record = world.delivery_log[-1]
        assert observe([record], Observer.for_level(4)) == []
        assert len(observe([record], Observer.for_level(5))) == 1


class TestLeakedInfoCount:
    def test_empty_is_all_zero(self):
        counts = leaked_info_count([])
        assert set(counts) == set(Field)
        assert all(v == 0 for v in counts.values())

    def test_two_notices_count_amount_twice(self, world):
        send(world)
        send(world)
        counts = leaked_info_count(observe(world.delivery_log,
                                           Observer.for_level(3)))
        assert counts[Field.AMOUNT] == 2
        assert counts[Field.DEPOSIT_LINK] == 2
        assert counts[Field.RECIPIENT_NAME_LEGAL] == 0


class TestSelectTargets:
    def test_filter_and_order(self, world):
        # amounts from the recorded attack run; oracle filters and sorts
        # them independently
        amounts = [20_000, 60_000, 110_000, 190_000]
        world.fis["lakebank"].daily_send_limit = Money(10_000_000)
        for cents in amounts:
            send(world, amount=cents)
        minimum = 100_000
        expected = sorted((a for a in amounts if a >= minimum), reverse=True)
        targets = select_targets(observe(world.delivery_log,
                                         Observer.for_level(3)),
                                 Money(minimum))
        assert [t.amount.cents for t in targets] == expected

    def test_no_standard_transfers_no_targets(self, world):
        assert select_targets([], Money(1)) == []

    def test_autodeposit_notices_never_selected(self, world):
        register_autodeposit(world, "bob", "bob.auto@tlsmail.test", "bob-north")
        world.emails["bob.auto@tlsmail.test"].provider_tls_incoming = False
        initiate_autodeposit(world, "alice-lake", "bob.auto@tlsmail.test",
                             Money(48_500))
        observations = observe(world.delivery_log, Observer.for_level(3))
        assert any(o.value(Field.STATUS) == "autodeposit" for o in observations)
        assert select_targets(observations, Money(1)) == []

    def test_ties_broken_by_observation_time(self, world):
        send(world, amount=5000)
        send(world, amount=5000)
        targets = select_targets(observe(world.delivery_log,
                                         Observer.for_level(3)), Money(1))
        assert targets[0].observed_at <= targets[1].observed_at


class TestShareableQuestions:
    def test_disjoint_sets_share_nothing(self):
        a = QuestionKnowledge(frozenset({"q1"}), frozenset({"q2"}))
        b = QuestionKnowledge(frozenset({"q3"}), frozenset({"q4"}))
        assert shareable_questions(a, b) == frozenset()

    def test_identical_sets_share_everything(self):
        k = QuestionKnowledge(frozenset({"q1", "q2"}), frozenset({"q3"}))
        assert shareable_questions(k, k) == k.all_questions

    def test_sized_overlap(self):
        # |A|=10, |B|=8, 3 common; oracle enumerates the common elements
        common = {f"shared-{i}" for i in range(3)}
        a_only = {f"a-{i}" for i in range(7)}
        b_only = {f"b-{i}" for i in range(5)}
        a = QuestionKnowledge(frozenset(a_only), frozenset(common))
        b = QuestionKnowledge(frozenset(common), frozenset(b_only))
        assert len(a.all_questions) == 10
        assert len(b.all_questions) == 8
        assert shareable_questions(a, b) == frozenset(common)


class TestGuessModel:
    def test_probabilities_validated(self):
        with pytest.raises(ValueError):
            GuessModel({QuestionStrength.WEAK: 1.5})

    def test_defaults(self):
        model = GuessModel.default()
        assert model.p(QuestionStrength.EXPOSED) == 1.0
        assert model.p(QuestionStrength.WEAK) == 0.5
        assert model.p(QuestionStrength.STRONG) == 0.0


class TestExecuteRedirection:
    def test_requires_hijack_capability(self, world):
        with pytest.raises(NoCapability):
            execute_redirection(world, Observer.for_level(2), "mallory-north")

    def test_exposed_question_first_attempt(self, world):
        send(world, question="What is my name?", answer="Ali",
             strength=QuestionStrength.EXPOSED)
        trace = execute_redirection(world, Observer.for_level(3),
                                    "mallory-north")
        assert trace.outcome is AttackOutcome.REDIRECTED_DEPOSIT
        assert list(trace.attempts_by_transfer.values()) == [1]
        assert world.ledger.accounts["mallory-north"].balance == Money(1500)

    def test_exposed_answer_from_message_text(self, world):
        send(world, question="What is your name?", answer="William",
             strength=QuestionStrength.EXPOSED, name="William Smith",
             message="Hi William, my part of the dinner bill.")
        trace = execute_redirection(world, Observer.for_level(3),
                                    "mallory-north")
        assert trace.outcome is AttackOutcome.REDIRECTED_DEPOSIT

    def test_strong_question_locks_out_and_refunds(self, world):
        before = world.ledger.accounts["alice-lake"].balance
        tx = send(world, strength=QuestionStrength.STRONG)
        trace = execute_redirection(world, Observer.for_level(3),
                                    "mallory-north")
        assert trace.outcome is AttackOutcome.LOCKED_OUT
        assert world.transfers[tx].status is TransferStatus.CANCELLED_ATTEMPTS_EXHAUSTED
        assert world.transfers[tx].attempts_used == 4
        assert world.ledger.accounts["alice-lake"].balance == before

    def test_nothing_to_see_is_no_target_found(self, world):
        trace = execute_redirection(world, Observer.for_level(3),
                                    "mallory-north")
        assert trace.outcome is AttackOutcome.NO_TARGET_FOUND

    def test_daily_deposit_ceiling_respected(self, world):
        world.fis["northbank"].daily_deposit_limit = Money(2000)
        send(world, amount=1500, question="What is my name?", answer="Ali",
             strength=QuestionStrength.EXPOSED)
        send(world, amount=1400, question="What is my name?", answer="Ali",
             strength=QuestionStrength.EXPOSED)
        trace = execute_redirection(world, Observer.for_level(3),
                                    "mallory-north")
        # only one fits under the CAD 20 ceiling; the other is skipped
        assert len(trace.deposited_transfers) == 1
        assert world.ledger.accounts["mallory-north"].balance == Money(1500)
        skipped = [s for s in trace.steps if "ceiling" in s.description]
        assert skipped and not skipped[0].success

    @pytest.mark.parametrize("p", [0.5, 0.25])
    def test_success_rate_converges_to_closed_form(self, p):
        # oracle: enumerate the 2^4 outcomes of four independent attempts;
        # success means at least one hit
        exact = 0.0
        for mask in range(16):
            prob = 1.0
            for bit in range(4):
                prob *= p if (mask >> bit) & 1 else (1 - p)
            if mask != 0:
                exact += prob
        assert abs(exact - (1 - (1 - p) ** 4)) < 1e-12

        from tests.conftest import build_two_bank_world
        model = GuessModel({QuestionStrength.EXPOSED: 1.0,
                            QuestionStrength.WEAK: p,
                            QuestionStrength.STRONG: 0.0})
        wins = 0
        trials = 3000
        for i in range(trials):
            w = build_two_bank_world(seed=10_000 + i)
            send(w, strength=QuestionStrength.WEAK)
            trace = execute_redirection(w, Observer.for_level(3),
                                        "mallory-north", guess_model=model)
            wins += trace.outcome is AttackOutcome.REDIRECTED_DEPOSIT
        rate = wins / trials
        sigma = (exact * (1 - exact) / trials) ** 0.5
        assert abs(rate - exact) < 3 * sigma + 1e-9

    def test_blocked_when_notices_carry_no_links(self, world):
        # craft a log of link-free transfer notices
        from etsim.notify import (Channel, EventKind, Notification,
                                  DeliveryRecord)
        note = Notification(event=EventKind.RECIPIENT_NOTICE,
                            channel=Channel.EMAIL,
                            destination=world.emails["bob@plainmail.test"],
                            fields={Field.STATUS: "directed"},
                            kind_label="directed", emitted_at=0,
                            delivered_at=5)
        world.delivery_log.append(DeliveryRecord(0, note, True, False))
        trace = execute_redirection(world, Observer.for_level(3),
                                    "mallory-north")
        assert trace.outcome is AttackOutcome.BLOCKED
