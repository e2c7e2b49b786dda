"""The matrix rows below are typed out by hand from the observed
production notification content; they are the oracle the embedded data is
checked against, not derived from it."""

import pytest

from etsim.legacy import (SecurityQuestion, initiate_autodeposit,
                          initiate_standard, register_autodeposit)
from etsim.model import FiPolicy, Money, NameFormat
from etsim.notify import (AUTODEPOSIT, REQUEST_MONEY, STANDARD, Channel,
                          EventKind, Field, Notification,
                          UnknownDestination, UnsupportedCombination,
                          deliver, field_matrix)

F = Field
CUSTOM = FiPolicy(NameFormat.CUSTOM)
LEGAL = FiPolicy(NameFormat.LEGAL)
BOTH = FiPolicy(NameFormat.BOTH)
LEGAL_NO_CONF = FiPolicy(NameFormat.LEGAL, confirmation_messages=False)

BASE = frozenset({F.PREFERRED_LANGUAGE, F.STATUS, F.AMOUNT, F.CUSTOM_MESSAGE})
LINKS = frozenset({F.SELECT_FI_LINK, F.EXPIRY_DATE, F.DEPOSIT_LINK})


class TestStandardRows:
    def test_email_notice_custom_sender(self):
        got = field_matrix(STANDARD, Channel.EMAIL, EventKind.RECIPIENT_NOTICE,
                           False, CUSTOM, None)
        assert got == BASE | LINKS | {F.RECIPIENT_NAME_CUSTOM,
                                      F.SENDER_NAME_CUSTOM, F.SENDER_FI,
                                      F.REFERENCE_NUMBER}

    def test_email_notice_legal_sender(self):
        got = field_matrix(STANDARD, Channel.EMAIL, EventKind.RECIPIENT_NOTICE,
                           False, LEGAL, None)
        assert F.SENDER_NAME_LEGAL in got
        assert F.SENDER_NAME_CUSTOM not in got

    def test_email_notice_subsequent_adds_preferred_link(self):
        first = field_matrix(STANDARD, Channel.EMAIL,
                             EventKind.RECIPIENT_NOTICE, False, CUSTOM, None)
        later = field_matrix(STANDARD, Channel.EMAIL,
                             EventKind.RECIPIENT_NOTICE, True, CUSTOM, None)
        assert later == first | {F.PREFERRED_FI_LINK}

    def test_sms_notice_drops_recipient_name_and_sender_fi(self):
        got = field_matrix(STANDARD, Channel.SMS, EventKind.RECIPIENT_NOTICE,
                           False, LEGAL, None)
        assert got == BASE | LINKS | {F.SENDER_NAME_LEGAL, F.REFERENCE_NUMBER}
        assert F.RECIPIENT_NAME_CUSTOM not in got
        assert F.RECIPIENT_NAME_LEGAL not in got
        assert F.SENDER_FI not in got

    def test_sms_notice_ignores_subsequent(self):
        first = field_matrix(STANDARD, Channel.SMS, EventKind.RECIPIENT_NOTICE,
                             False, LEGAL, None)
        later = field_matrix(STANDARD, Channel.SMS, EventKind.RECIPIENT_NOTICE,
                             True, LEGAL, None)
        assert first == later

    def test_sender_confirmation(self):
        got = field_matrix(STANDARD, Channel.EMAIL,
                           EventKind.SENDER_CONFIRMATION, False, CUSTOM, LEGAL)
        assert got == BASE | {F.RECIPIENT_NAME_CUSTOM, F.SENDER_NAME_CUSTOM,
                              F.CONFIRMATION_MESSAGE, F.SENDER_FI}

    def test_confirmation_message_depends_on_depositor_institution(self):
        with_conf = field_matrix(STANDARD, Channel.EMAIL,
                                 EventKind.SENDER_CONFIRMATION, False,
                                 CUSTOM, LEGAL)
        without = field_matrix(STANDARD, Channel.EMAIL,
                               EventKind.SENDER_CONFIRMATION, False,
                               CUSTOM, LEGAL_NO_CONF)
        assert with_conf - without == {F.CONFIRMATION_MESSAGE}


class TestAutodepositRows:
    def test_recipient_notice_has_legal_name_and_recipient_fi(self):
        got = field_matrix(AUTODEPOSIT, Channel.EMAIL,
                           EventKind.RECIPIENT_NOTICE, False, CUSTOM, LEGAL)
        assert got == BASE | {F.RECIPIENT_NAME_LEGAL, F.SENDER_NAME_CUSTOM,
                              F.SENDER_FI, F.REFERENCE_NUMBER, F.RECIPIENT_FI}

    def test_recipient_notice_has_no_links(self):
        got = field_matrix(AUTODEPOSIT, Channel.EMAIL,
                           EventKind.RECIPIENT_NOTICE, False, CUSTOM, LEGAL)
        assert not got & LINKS

    def test_sender_confirmation_legal_only(self):
        got = field_matrix(AUTODEPOSIT, Channel.EMAIL,
                           EventKind.SENDER_CONFIRMATION, False, CUSTOM, LEGAL)
        assert got == BASE | {F.RECIPIENT_NAME_LEGAL, F.SENDER_NAME_CUSTOM,
                              F.SENDER_FI, F.REFERENCE_NUMBER}

    def test_sender_confirmation_adds_custom_when_recipient_fi_passes_both(self):
        got = field_matrix(AUTODEPOSIT, Channel.EMAIL,
                           EventKind.SENDER_CONFIRMATION, False, CUSTOM, BOTH)
        assert {F.RECIPIENT_NAME_LEGAL, F.RECIPIENT_NAME_CUSTOM} <= got

    def test_no_sms_flow_exists(self):
        with pytest.raises(UnsupportedCombination):
            field_matrix(AUTODEPOSIT, Channel.SMS, EventKind.RECIPIENT_NOTICE,
                         False, CUSTOM, LEGAL)


class TestRequestRows:
    def test_email_notice_full_row(self):
        got = field_matrix(REQUEST_MONEY, Channel.EMAIL,
                           EventKind.REQUEST_NOTICE, False, LEGAL, CUSTOM)
        assert got == BASE | LINKS | {F.RECIPIENT_NAME_CUSTOM,
                                      F.SENDER_NAME_LEGAL, F.SENDER_FI,
                                      F.SENDER_EMAIL, F.RECIPIENT_FI,
                                      F.REFERENCE_NUMBER}

    def test_requestor_name_is_legal_plus_custom_for_custom_policy(self):
        got = field_matrix(REQUEST_MONEY, Channel.EMAIL,
                           EventKind.REQUEST_NOTICE, False, CUSTOM, LEGAL)
        assert {F.SENDER_NAME_LEGAL, F.SENDER_NAME_CUSTOM} <= got

    def test_sms_notice_drops_sender_fi_only(self):
        email = field_matrix(REQUEST_MONEY, Channel.EMAIL,
                             EventKind.REQUEST_NOTICE, False, LEGAL, CUSTOM)
        sms = field_matrix(REQUEST_MONEY, Channel.SMS,
                           EventKind.REQUEST_NOTICE, False, LEGAL, CUSTOM)
        assert email - sms == {F.SENDER_FI}

    def test_requestor_confirmation(self):
        got = field_matrix(REQUEST_MONEY, Channel.EMAIL,
                           EventKind.REQUESTOR_CONFIRMATION, False, LEGAL,
                           CUSTOM)
        assert got == BASE | {F.RECIPIENT_NAME_CUSTOM, F.SENDER_NAME_LEGAL,
                              F.CONFIRMATION_MESSAGE, F.SENDER_FI}


class TestNoReduction:
    def test_field_keys_blind_to_tls_and_amount(self, world):
        # same transfer shape, flipping destination TLS and scaling the
        # amount by 10: identical key sets
        question = SecurityQuestion("colour?", "blue")
        sets = []
        for amount, address in ((Money(1500), "bob.auto@tlsmail.test"),
                                (Money(15000), "bob@plainmail.test")):
            tx = initiate_standard(world, "alice-lake", "Bobby", address,
                                   amount, question)
            note = world.delivery_log[-1].notification
            assert note.transfer_ref == tx
            sets.append(note.field_names())
        assert sets[0] == sets[1]


class TestComposeValues:
    def test_standard_notice_values(self, world):
        question = SecurityQuestion("colour?", "blue")
        initiate_standard(world, "alice-lake", "Bobby", "bob@plainmail.test",
                          Money(1500), question, "coffee money")
        note = world.delivery_log[-1].notification
        fields = note.fields
        assert fields[F.SENDER_FI] == "Lake Bank"
        assert fields[F.AMOUNT] == "CAD 15.00"
        assert fields[F.RECIPIENT_NAME_CUSTOM] == "Bobby"
        assert fields[F.SENDER_NAME_CUSTOM] == "Ali"
        assert fields[F.CUSTOM_MESSAGE] == "coffee money"
        assert F.EXPIRY_DATE in fields and fields[F.EXPIRY_DATE].startswith("d030")
        assert fields[F.DEPOSIT_LINK] == note.link_token

    def test_autodeposit_confirmation_names_registered_owner(self, world):
        register_autodeposit(world, "bob", "bob.auto@tlsmail.test", "bob-north")
        initiate_autodeposit(world, "alice-lake", "bob.auto@tlsmail.test",
                             Money(1500))
        confirmation = world.delivery_log[-1].notification
        assert confirmation.event is EventKind.SENDER_CONFIRMATION
        assert confirmation.fields[F.RECIPIENT_NAME_LEGAL] == "Robert Belanger"
        assert confirmation.fields[F.RECIPIENT_FI] if F.RECIPIENT_FI in confirmation.fields else True

    def test_render_is_bit_exact(self):
        note = Notification(
            event=EventKind.RECIPIENT_NOTICE,
            channel=Channel.EMAIL,
            destination="who",  # rendered as portal:who
            fields={F.STATUS: "sent", F.AMOUNT: "CAD 15.00"},
            kind_label=STANDARD,
        )
        assert note.render() == (
            "recipient-notice\temail\tportal:who\n"
            "Amount\tCAD 15.00\n"
            "Status\tsent\n"
        )

    def test_render_sorts_by_field_name(self, world):
        question = SecurityQuestion("colour?", "blue")
        initiate_standard(world, "alice-lake", "Bobby", "bob@plainmail.test",
                          Money(1500), question)
        text = world.delivery_log[-1].notification.render()
        lines = text.strip().split("\n")[1:]
        names = [line.split("\t")[0] for line in lines]
        assert names == sorted(names)


class TestDelivery:
    def test_latency_stays_under_thirty_minutes(self, world):
        question = SecurityQuestion("colour?", "blue")
        for _ in range(40):
            initiate_standard(world, "alice-lake", "Bobby",
                              "bob@plainmail.test", Money(100), question)
        for record in world.delivery_log:
            latency = record.notification.delivered_at - record.notification.emitted_at
            assert 1 <= latency < 30

    def test_email_without_tls_is_plaintext_in_transit(self, world):
        question = SecurityQuestion("colour?", "blue")
        initiate_standard(world, "alice-lake", "Bobby", "bob@plainmail.test",
                          Money(100), question)
        record = world.delivery_log[-1]
        assert record.plaintext_exposed_in_transit
        assert not record.endpoint_exposed

    def test_email_with_tls_clean_endpoint_no_exposure(self, world):
        question = SecurityQuestion("colour?", "blue")
        initiate_standard(world, "alice-lake", "Bobby",
                          "bob.auto@tlsmail.test", Money(100), question)
        record = world.delivery_log[-1]
        assert not record.plaintext_exposed_in_transit
        assert not record.endpoint_exposed

    def test_sms_encrypted_in_transit_but_endpoint_readable(self, world):
        world.phones["6135550123"].endpoint_compromised = True
        question = SecurityQuestion("colour?", "blue")
        initiate_standard(world, "alice-lake", "Bobby", "6135550123",
                          Money(100), question)
        record = world.delivery_log[-1]
        assert not record.plaintext_exposed_in_transit
        assert record.endpoint_exposed

    def test_portal_never_exposed(self, world):
        # confirmations from a portal-enabled institution stay inside it
        world.fis["northbank"].supports_portal_inbox = True
        question = SecurityQuestion("colour?", "blue")
        from etsim.legacy import answer_and_deposit
        tx = initiate_standard(world, "bob-north", "Ali", "alice@tlsmail.test",
                               Money(100), question)
        answer_and_deposit(world, world.transfers[tx].link_token, "blue",
                           "alice-lake")
        record = world.delivery_log[-1]
        assert record.notification.channel is Channel.PORTAL_INBOX
        assert not record.plaintext_exposed_in_transit
        assert not record.endpoint_exposed

    def test_unknown_destination(self, world):
        question = SecurityQuestion("colour?", "blue")
        with pytest.raises(UnknownDestination):
            initiate_standard(world, "alice-lake", "X", "ghost@nowhere.test",
                              Money(100), question)
