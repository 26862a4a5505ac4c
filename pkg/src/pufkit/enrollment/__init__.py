"""Enrollment: majority voting, preselection and multiple reference responses."""

from .enroller import (
    Challenge,
    EnrollmentPlan,
    EnrollmentRecord,
    ReferenceResponse,
    enroll,
    load_challenge,
    load_record,
    reference_ber_table,
    save_challenge,
    save_record,
)
from .voting import majority_vote, preselect

__all__ = [
    'majority_vote', 'preselect', 'enroll', 'EnrollmentPlan', 'EnrollmentRecord',
    'ReferenceResponse', 'Challenge', 'reference_ber_table', 'save_record',
    'load_record', 'save_challenge', 'load_challenge',
]
