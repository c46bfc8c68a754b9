#!/usr/bin/env python
# coding: utf-8

# # 0 - quickStart Example

# ### 1. Load Q_CRYPTO

# In[1]:


import Q_CRYPTO


# ### 2. Run one key distribution session
# 
# Alice sends 2000 pulses over a perfect channel. The session returns a summary, the outcome (accepted, rejected or suppressed) and the keys.

# In[2]:


rng = Q_CRYPTO.seeded_rng(42)
result = Q_CRYPTO.run_session(2000, rng)
result.summary


# On a clean channel about half of the pulses survive sifting, a third of those are revealed, and Alice and Bob end up with the same key.

# In[3]:


(result.outcome.alice_key.bits == result.outcome.bob_key.bits).all()


# ### 3. Use the key as a one-time pad
# 
# Key bits can be spent only once; encrypting a message consumes them.

# In[4]:


message = [1, 0, 1, 1, 0, 1, 0, 0]
cipher = Q_CRYPTO.one_time_pad(result.outcome.alice_key, message)
plain = Q_CRYPTO.one_time_pad(result.outcome.bob_key, cipher)
print(cipher, plain)


# ### 4. Add an eavesdropper
# 
# Eve intercepts every pulse, measures it in the rectilinear basis and resends what she saw. A quarter of the sifted bits now disagree and the session is rejected.

# In[5]:


channel = Q_CRYPTO.QuantumChannelConfig(eavesdropper=Q_CRYPTO.intercept_resend('rectilinear'))
result = Q_CRYPTO.run_session(2000, Q_CRYPTO.seeded_rng(42), channel)
result.summary['qber'], result.summary['verdict']


# ### 5. Toss a coin
# 
# Alice commits to a basis with 1000 photons, Bob guesses, Alice certifies and Bob checks.

# In[6]:


verdict, transcript = Q_CRYPTO.toss_round(1000, rng=Q_CRYPTO.seeded_rng(7))
verdict.winner, verdict.verification.result


# ### 6. Replay the worked example tables

# In[7]:


for name, replay in Q_CRYPTO.replay_paper_tables().items():
    print(name, replay.passed)

